#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rawsea/detector.hpp"
#include "rawsea/raster.hpp"

namespace rawsea::eval {

struct SIoUParams {
  double gamma = 0.5;
  double kappa = std::sqrt(8.0);

  void validate() const;
};

inline constexpr double kDefaultSIoUThreshold = 0.40;

double iou(const BBox& a, const BBox& b);
/// p = 1 - gamma * exp(-sqrt(w1*h1 + w2*h2) / (sqrt(2) * kappa))
double siou_exponent(const BBox& a, const BBox& b, const SIoUParams& params = {});
double siou(const BBox& a, const BBox& b, const SIoUParams& params = {});

/// L1 distance between (x_min, y_min, x_max, y_max) corner vectors divided
/// by sqrt(w*h) of `truth`. Throws ZeroAreaGroundTruth.
double loc_error_ratio(const BBox& truth, const BBox& pred);

struct DetectionMatch {
  std::size_t pred = 0;
  std::size_t truth = 0;
  double siou = 0.0;
};

struct DetectionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  double precision() const;  ///< 0 when there are no predictions
  double recall() const;     ///< 0 when there is no truth
  double f1() const;         ///< 0 when precision + recall == 0
  DetectionCounts& operator+=(const DetectionCounts& o);
};

struct DetectionEval {
  DetectionCounts counts;
  std::vector<DetectionMatch> matches;

  double precision() const { return counts.precision(); }
  double recall() const { return counts.recall(); }
  double f1() const { return counts.f1(); }
};

/// Greedy matching in descending score order; each prediction takes the
/// unused truth of highest SIoU (lower index on ties) when SIoU >= threshold.
DetectionEval evaluate_detections(std::span<const detect::Detection> preds, std::span<const BBox> truth,
                                  double threshold = kDefaultSIoUThreshold, const SIoUParams& params = {});

/// Rows are truth, columns predicted.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t k = 2);
  ConfusionMatrix(std::size_t k, std::vector<std::int64_t> counts);

  std::size_t classes() const { return k_; }
  std::int64_t at(std::size_t truth, std::size_t pred) const { return counts_[truth * k_ + pred]; }
  std::int64_t& at(std::size_t truth, std::size_t pred) { return counts_[truth * k_ + pred]; }
  void add(std::size_t truth, std::size_t pred, std::int64_t n = 1);
  std::int64_t total() const;
  const std::vector<std::int64_t>& counts() const { return counts_; }
  nlohmann::json to_json() const;

 private:
  std::size_t k_;
  std::vector<std::int64_t> counts_;
};

/// Binary MCC; 0 when any factor of the denominator is 0.
double mcc(std::int64_t tp, std::int64_t tn, std::int64_t fp, std::int64_t fn);
/// Class 1 is positive. Requires a 2x2 matrix.
double mcc(const ConfusionMatrix& cm);
/// Gorodkin R_k; 0 on a zero denominator.
double mcc_multiclass(const ConfusionMatrix& cm);

struct GranuleEval {
  std::string granule;
  DetectionEval eval;
};

/// {"threshold","precision","recall","f1","tp","fp","fn","per_granule",
///  "confusion","mcc"}; confusion and mcc are null when absent.
nlohmann::json evaluation_report(double threshold, std::span<const GranuleEval> granules,
                                 const std::optional<ConfusionMatrix>& confusion);

}  // namespace rawsea::eval
