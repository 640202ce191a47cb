#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rawsea/geo.hpp"
#include "rawsea/raster.hpp"
#include "rawsea/time.hpp"

namespace rawsea::ais {

inline constexpr const char* kFishingStatus = "Engaged in fishing";

struct AisRecord {
  std::int64_t mmsi = 0;
  UtcTime timestamp{};
  double lat = 0.0;
  double lon = 0.0;
  std::optional<double> sog;
  std::string nav_status;
  std::string ship_type;
  std::optional<double> length_m;
  std::optional<double> width_m;

  geo::LonLat position() const { return {lon, lat}; }
  friend bool operator==(const AisRecord&, const AisRecord&) = default;
};

struct Reject {
  std::size_t line = 0;  ///< 1-based, header is line 1
  std::string reason;
  std::string raw;
};

struct ParseResult {
  std::vector<AisRecord> records;
  std::vector<Reject> rejects;
};

/// Header: timestamp,mmsi,lat,lon,sog,nav_status,ship_type,length,width
/// (any order, extra columns ignored). Throws EmptyFile / MissingColumn.
ParseResult parse_ais_csv(std::istream& in);
ParseResult read_ais_csv(const std::filesystem::path& path);
void write_ais_csv(std::ostream& out, std::span<const AisRecord> records);

struct MatchConfig {
  double temporal_window_s = 300.0;
  double radius_m = 300.0;
  int day_window = 1;
  double fishing_weight = 0.5;
  double max_cost_m = 2000.0;

  void validate() const;
};

enum class FilterMode { Dense, Daily };

std::string to_string(FilterMode m);
FilterMode filter_mode_from_string(const std::string& s);

/// Dense: |t - sensing| <= temporal_window_s. Daily: calendar-day distance
/// <= day_window. Both require the position within radius_m of the
/// footprint.
std::vector<AisRecord> filter_records(std::span<const AisRecord> records, const GranuleMeta& meta, int width,
                                      int height, const MatchConfig& cfg, FilterMode mode);

/// Distance from p to the infinite line through a and b; |p - a| if a == b.
double perpendicular_distance(geo::Vec2 p, geo::Vec2 a, geo::Vec2 b);

/// One vessel as seen by the cost builder. `nearest` is the record closest
/// in time to sensing; `other` completes the track line when present.
struct TrackObservation {
  std::int64_t mmsi = 0;
  geo::Vec2 nearest;
  std::optional<geo::Vec2> other;
  std::string nav_status;
};

/// Per-MMSI observations in ascending MMSI order. The line uses the two
/// records bracketing sensing time, else the two latest before it, else
/// the two earliest after it.
std::vector<TrackObservation> track_observations(std::span<const AisRecord> records, UtcTime sensing,
                                                 const geo::LocalFrame& frame);

struct CostCell {
  double d_eucl = 0.0;
  double d_perp = 0.0;
  double w_nav = 1.0;
};

struct CostMatrix {
  static constexpr double kSentinel = std::numeric_limits<double>::infinity();

  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> costs;  ///< row-major
  std::vector<CostCell> cells;
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;

  CostMatrix() = default;
  CostMatrix(std::size_t n, std::size_t m);

  double at(std::size_t i, std::size_t j) const { return costs[i * cols + j]; }
  double& at(std::size_t i, std::size_t j) { return costs[i * cols + j]; }
  static bool is_sentinel(double c) { return c == kSentinel; }
};

/// C_ij = w_nav * (d_perp + d_eucl); entries above max_cost_m become the
/// sentinel. Throws FrameMismatch on non-finite coordinates.
CostMatrix build_cost_matrix(std::span<const geo::Vec2> centers, std::span<const TrackObservation> tracks,
                             const MatchConfig& cfg);

/// Daily-mode costs: distance to each MMSI's spatially nearest record,
/// sentinel beyond radius_m.
CostMatrix build_radius_cost_matrix(std::span<const geo::Vec2> centers, std::span<const AisRecord> records,
                                    const geo::LocalFrame& frame, const MatchConfig& cfg);

}  // namespace rawsea::ais
