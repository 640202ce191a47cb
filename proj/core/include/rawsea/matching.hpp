#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rawsea/ais.hpp"
#include "rawsea/hungarian.hpp"
#include "rawsea/raster.hpp"

namespace rawsea::ais {

struct BoxRef {
  std::string box_id;
  BBox box;
};

struct GranuleBoxes {
  std::string granule_id;
  GranuleMeta meta;
  int width = 0;
  int height = 0;
  std::vector<BoxRef> boxes;
};

enum class DecisionStatus { Matched, Unmatched, SkippedDuplicate };

std::string to_string(DecisionStatus s);
DecisionStatus decision_status_from_string(const std::string& s);

struct Decision {
  std::string granule;
  std::string box_id;
  std::optional<std::int64_t> mmsi;
  std::optional<double> cost;
  DecisionStatus status = DecisionStatus::Unmatched;

  friend bool operator==(const Decision&, const Decision&) = default;
};

struct Candidate {
  std::int64_t mmsi = 0;
  double cost = 0.0;
  CostCell cell;
};

struct GranuleMatch {
  std::string granule_id;
  CostMatrix costs;  ///< rows follow GranuleBoxes::boxes
  std::vector<std::int64_t> col_mmsi;
  Assignment assignment;
  /// Finite-cost candidates per box, ascending cost.
  std::vector<std::vector<Candidate>> candidates;
};

struct GlobalMatch {
  std::string granule;
  std::string box_id;
  double cost = 0.0;
};

struct MatchReport {
  std::vector<GranuleMatch> granules;
  std::vector<Decision> decisions;  ///< granule order, then box order
  std::map<std::int64_t, GlobalMatch> global;
  std::size_t skipped_duplicates = 0;
};

/// Box centre in the granule's local frame.
geo::Vec2 box_center_local(const BBox& box, const Geotransform& gt, const geo::LocalFrame& frame);

/// Per-granule costs and Hungarian solve, followed by a sequential pass in
/// the given granule order that keeps the first match of each MMSI and
/// flags later ones skipped_duplicate. Boxes left unmatched are not
/// re-matched.
MatchReport match_granules(std::span<const GranuleBoxes> granules, std::span<const AisRecord> records,
                           const MatchConfig& cfg, FilterMode mode);

void write_decisions_jsonl(std::ostream& out, std::span<const Decision> decisions);
std::vector<Decision> read_decisions_jsonl(std::istream& in);

}  // namespace rawsea::ais
