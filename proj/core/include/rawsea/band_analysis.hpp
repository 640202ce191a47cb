#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rawsea/coregister.hpp"
#include "rawsea/metrics.hpp"
#include "rawsea/raster.hpp"

namespace rawsea::bands {

inline const std::vector<double> kDefaultTaus{0.1, 0.2, 0.3, 0.4, 0.5};
inline constexpr int kSeaDilation = 8;

struct BandStats {
  std::string band_id;
  double mean_vessel_dn = 0.0;
  double mean_sea_dn = 0.0;
  double std_dn = 0.0;
  std::vector<std::pair<double, double>> hog_counts;  ///< (tau, fraction), ascending tau
};

struct StatsConfig {
  std::size_t sea_sample = 1000;
  std::uint64_t seed = 0;
  std::vector<double> taus = kDefaultTaus;
};

/// Boxes keyed by band id.
using BandBoxes = std::map<std::string, std::vector<BBox>>;

/// Vessel mean over the union of box pixels; sea mean over sea_sample
/// pixels drawn without replacement outside every box dilated by 8 px;
/// population std over the valid band. Pixels outside `masks` (when given)
/// are treated as fill. Throws InsufficientSeaPixels / EmptyBoxes.
std::vector<BandStats> band_stats(const Granule& g, const BandBoxes& boxes, const StatsConfig& cfg = {},
                                  const std::vector<coreg::ValidityMask>* masks = nullptr);

/// Fraction of 2x2 cells inside the boxes whose strongest central-difference
/// gradient exceeds tau times the strongest over all box cells.
std::vector<std::pair<double, double>> hog_feature_count(const BandImage& band, std::span<const BBox> boxes,
                                                         std::span<const double> taus);

/// Per-cell maximum gradient magnitude for every 2x2 cell inside the boxes.
std::vector<double> hog_cell_strengths(const BandImage& band, std::span<const BBox> boxes);

enum class Metric { PCC, ED };

std::string to_string(Metric m);

struct DissimilarityMatrix {
  Metric metric = Metric::PCC;
  std::vector<std::string> band_ids;
  std::vector<double> values;  ///< k x k, row-major

  double at(std::size_t i, std::size_t j) const { return values[i * band_ids.size() + j]; }
};

/// Population Pearson correlation; throws ConstantBand when either side
/// has zero variance.
double pcc(std::span<const double> a, std::span<const double> b);
/// Raw Euclidean distance.
double euclidean(std::span<const double> a, std::span<const double> b);

/// Box pixels of each band concatenated in box order.
std::vector<double> box_pixels(const BandImage& band, std::span<const BBox> boxes);

/// Pairwise PCC, or ED divided by sqrt(pixel count). Needs >= 2 bands.
DissimilarityMatrix dissimilarity(const Granule& g, std::span<const BBox> boxes, Metric metric);

struct BandMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

nlohmann::json band_report(std::span<const BandStats> stats, std::span<const DissimilarityMatrix> dissim,
                           const std::map<std::string, BandMetrics>& metrics);

/// Writes band_report.json and, when the report has bands, the five panels
/// band_intensity.svg, band_metrics.svg, band_hog.svg, dissim_pcc.svg and
/// dissim_ed.svg. Returns the files written.
std::vector<std::filesystem::path> write_band_report(const nlohmann::json& report, const std::filesystem::path& dir);

}  // namespace rawsea::bands
