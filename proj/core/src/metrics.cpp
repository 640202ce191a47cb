#include "rawsea/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "rawsea/error.hpp"

namespace rawsea::eval {

void SIoUParams::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be in (0, 1)");
  if (!(kappa > 0.0)) throw Error(ErrorCode::InvalidArgument, "kappa must be > 0");
}

double iou(const BBox& a, const BBox& b) {
  if (!a.valid() || !b.valid()) return 0.0;
  const double iw = std::min(a.x_max(), b.x_max()) - std::max(a.x, b.x);
  const double ih = std::min(a.y_max(), b.y_max()) - std::max(a.y, b.y);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

double siou_exponent(const BBox& a, const BBox& b, const SIoUParams& params) {
  params.validate();
  return 1.0 - params.gamma * std::exp(-std::sqrt(a.area() + b.area()) / (std::sqrt(2.0) * params.kappa));
}

double siou(const BBox& a, const BBox& b, const SIoUParams& params) {
  params.validate();
  const double u = iou(a, b);
  if (u == 0.0 || u == 1.0) return u;
  return std::pow(u, siou_exponent(a, b, params));
}

double loc_error_ratio(const BBox& truth, const BBox& pred) {
  if (!(truth.area() > 0.0)) throw Error(ErrorCode::ZeroAreaGroundTruth, "ground-truth box has zero area");
  const double eps = std::abs(truth.x - pred.x) + std::abs(truth.y - pred.y) +
                     std::abs(truth.x_max() - pred.x_max()) + std::abs(truth.y_max() - pred.y_max());
  return eps / std::sqrt(truth.area());
}

double DetectionCounts::precision() const { return tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp); }
double DetectionCounts::recall() const { return tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn); }

double DetectionCounts::f1() const {
  const double p = precision(), r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

DetectionCounts& DetectionCounts::operator+=(const DetectionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  return *this;
}

DetectionEval evaluate_detections(std::span<const detect::Detection> preds, std::span<const BBox> truth,
                                  double threshold, const SIoUParams& params) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw Error(ErrorCode::InvalidArgument, "threshold must be in (0, 1)");
  params.validate();
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return preds[a].score > preds[b].score; });
  std::vector<char> used(truth.size(), 0);
  DetectionEval out;
  for (std::size_t pi : order) {
    std::size_t best = truth.size();
    double best_s = -1.0;
    for (std::size_t ti = 0; ti < truth.size(); ++ti) {
      if (used[ti]) continue;
      const double s = siou(preds[pi].box, truth[ti], params);
      if (s >= threshold && s > best_s) {
        best = ti;
        best_s = s;
      }
    }
    if (best < truth.size()) {
      used[best] = 1;
      out.matches.push_back({pi, best, best_s});
    }
  }
  out.counts.tp = out.matches.size();
  out.counts.fp = preds.size() - out.counts.tp;
  out.counts.fn = truth.size() - out.counts.tp;
  return out;
}

ConfusionMatrix::ConfusionMatrix(std::size_t k) : k_(k), counts_(k * k, 0) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "confusion matrix needs at least 2 classes");
}

ConfusionMatrix::ConfusionMatrix(std::size_t k, std::vector<std::int64_t> counts) : k_(k), counts_(std::move(counts)) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "confusion matrix needs at least 2 classes");
  if (counts_.size() != k * k) throw Error(ErrorCode::SizeMismatch, "confusion counts must be k*k");
  if (std::any_of(counts_.begin(), counts_.end(), [](std::int64_t c) { return c < 0; })) {
    throw Error(ErrorCode::InvalidArgument, "confusion counts must be non-negative");
  }
}

void ConfusionMatrix::add(std::size_t truth, std::size_t pred, std::int64_t n) {
  if (truth >= k_ || pred >= k_) throw Error(ErrorCode::InvalidArgument, "class index out of range");
  at(truth, pred) += n;
}

std::int64_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0}); }

nlohmann::json ConfusionMatrix::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t t = 0; t < k_; ++t) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t p = 0; p < k_; ++p) row.push_back(at(t, p));
    rows.push_back(std::move(row));
  }
  return rows;
}

double mcc(std::int64_t tp, std::int64_t tn, std::int64_t fp, std::int64_t fn) {
  const long double a = tp + fp, b = tp + fn, c = tn + fn, d = tn + fp;
  if (a == 0 || b == 0 || c == 0 || d == 0) return 0.0;
  const long double num = (long double)tn * tp - (long double)fp * fn;
  return double(num / std::sqrt(a * b * c * d));
}

double mcc(const ConfusionMatrix& cm) {
  if (cm.classes() != 2) throw Error(ErrorCode::InvalidArgument, "binary MCC needs a 2x2 matrix");
  return mcc(cm.at(1, 1), cm.at(0, 0), cm.at(0, 1), cm.at(1, 0));
}

double mcc_multiclass(const ConfusionMatrix& cm) {
  const std::size_t k = cm.classes();
  long double s = 0, c = 0, sum_pt = 0, sum_p2 = 0, sum_t2 = 0;
  for (std::size_t i = 0; i < k; ++i) {
    long double t = 0, p = 0;
    for (std::size_t j = 0; j < k; ++j) {
      t += cm.at(i, j);
      p += cm.at(j, i);
    }
    c += cm.at(i, i);
    s += t;
    sum_pt += p * t;
    sum_p2 += p * p;
    sum_t2 += t * t;
  }
  const long double den = (s * s - sum_p2) * (s * s - sum_t2);
  if (den <= 0) return 0.0;
  return double((c * s - sum_pt) / std::sqrt(den));
}

nlohmann::json evaluation_report(double threshold, std::span<const GranuleEval> granules,
                                 const std::optional<ConfusionMatrix>& confusion) {
  using nlohmann::json;
  DetectionCounts total;
  json per = json::array();
  for (const auto& g : granules) {
    total += g.eval.counts;
    per.push_back({{"granule", g.granule},
                   {"tp", g.eval.counts.tp},
                   {"fp", g.eval.counts.fp},
                   {"fn", g.eval.counts.fn},
                   {"precision", g.eval.precision()},
                   {"recall", g.eval.recall()},
                   {"f1", g.eval.f1()}});
  }
  json j;
  j["threshold"] = threshold;
  j["precision"] = total.precision();
  j["recall"] = total.recall();
  j["f1"] = total.f1();
  j["tp"] = total.tp;
  j["fp"] = total.fp;
  j["fn"] = total.fn;
  j["per_granule"] = std::move(per);
  if (confusion) {
    j["confusion"] = confusion->to_json();
    j["mcc"] = confusion->classes() == 2 ? mcc(*confusion) : mcc_multiclass(*confusion);
  } else {
    j["confusion"] = nullptr;
    j["mcc"] = nullptr;
  }
  return j;
}

}  // namespace rawsea::eval
