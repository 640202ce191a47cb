#include "rawsea/threshold.hpp"

#include <algorithm>
#include <cmath>

#include "rawsea/error.hpp"

namespace rawsea::label {

Histogram Histogram::of(std::span<const DN> pixels) {
  Histogram h;
  h.total = pixels.size();
  if (pixels.size() < 8192) {
    std::vector<DN> sorted(pixels.begin(), pixels.end());
    std::sort(sorted.begin(), sorted.end());
    for (DN v : sorted) {
      if (h.values.empty() || h.values.back() != v) {
        h.values.push_back(v);
        h.counts.push_back(0);
      }
      ++h.counts.back();
    }
    return h;
  }
  std::vector<std::uint64_t> full(65536, 0);
  for (DN v : pixels) ++full[v];
  for (std::size_t v = 0; v < full.size(); ++v) {
    if (full[v] == 0) continue;
    h.values.push_back(DN(v));
    h.counts.push_back(full[v]);
  }
  return h;
}

double Histogram::mean() const {
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < values.size(); ++i) sum += counts[i] * values[i];
  return total ? double(sum) / double(total) : 0.0;
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Otsu: return "otsu";
    case Method::Li: return "li";
    case Method::Isodata: return "isodata";
    case Method::Mean: return "mean";
  }
  return "?";
}

namespace {

struct Moments {
  std::uint64_t n = 0;
  long double sum = 0;
  long double sum2 = 0;
};

// Split moments of the histogram at t: background DN <= t, foreground DN > t.
std::pair<Moments, Moments> split(const Histogram& h, double t) {
  Moments lo, hi;
  for (std::size_t i = 0; i < h.values.size(); ++i) {
    Moments& m = double(h.values[i]) <= t ? lo : hi;
    const long double v = h.values[i];
    m.n += h.counts[i];
    m.sum += v * h.counts[i];
    m.sum2 += v * v * h.counts[i];
  }
  return {lo, hi};
}

void require_two_values(const Histogram& h) {
  if (h.constant()) throw Error(ErrorCode::ConstantPatch, "patch has fewer than two distinct DN values");
}

/// Iterates t <- update(t) from the mean and returns the first t whose
/// update moves it by less than kConvergence.
template <class Update>
double fixed_point(const Histogram& h, double shift, Update&& update, const char* name) {
  double t = h.mean() + shift;
  for (int k = 0; k < kMaxIterations; ++k) {
    const double next = update(t);
    if (std::abs(next - t) < kConvergence) return t - shift;
    t = next;
  }
  throw Error(ErrorCode::NonConvergence, std::string(name) + " threshold did not converge in 64 iterations");
}

}  // namespace

ClassStats class_stats(const Histogram& h, double t) {
  const auto [lo, hi] = split(h, t);
  ClassStats s;
  if (h.total == 0) return s;
  s.w_bg = double(lo.n) / double(h.total);
  s.w_fg = double(hi.n) / double(h.total);
  if (lo.n) {
    const long double m = lo.sum / lo.n;
    s.mean_low = double(m);
    s.var_bg = double(std::max<long double>(0, lo.sum2 / lo.n - m * m));
  }
  if (hi.n) {
    const long double m = hi.sum / hi.n;
    s.mean_high = double(m);
    s.var_fg = double(std::max<long double>(0, hi.sum2 / hi.n - m * m));
  }
  return s;
}

double otsu_threshold(const Histogram& h) {
  require_two_values(h);
  // Minimising w_bg*var_bg + w_fg*var_fg is maximising
  // B(t) = S_bg^2/n_bg + S_fg^2/n_fg (the total second moment is fixed).
  // B is compared exactly as a fraction while the products fit in 128 bits.
  const bool exact = h.total <= (1u << 18);
  using i128 = __int128;
  i128 total_sum = 0;
  for (std::size_t i = 0; i < h.values.size(); ++i) total_sum += i128(h.values[i]) * h.counts[i];

  i128 n_bg = 0, s_bg = 0;
  i128 best_num = -1, best_den = 1;
  long double best_ld = -1;
  double best_t = h.values.front();
  for (std::size_t i = 0; i < h.values.size(); ++i) {
    n_bg += h.counts[i];
    s_bg += i128(h.values[i]) * h.counts[i];
    const i128 n_fg = i128(h.total) - n_bg;
    const i128 s_fg = total_sum - s_bg;
    i128 num, den;
    if (n_fg == 0) {
      num = s_bg * s_bg;
      den = n_bg;
    } else {
      num = s_bg * s_bg * n_fg + s_fg * s_fg * n_bg;
      den = n_bg * n_fg;
    }
    bool improves;
    if (exact) {
      improves = best_num < 0 || num * best_den > best_num * den;
    } else {
      const long double b = static_cast<long double>(num) / static_cast<long double>(den);
      improves = best_ld < 0 || b > best_ld;
      if (improves) best_ld = b;
    }
    if (improves) {
      best_num = num;
      best_den = den;
      best_t = h.values[i];
    }
  }
  return best_t;
}

double li_threshold(const Histogram& h) {
  require_two_values(h);
  // Minimum cross-entropy iteration in the log domain; zeros are lifted by 1.
  const double shift = h.values.front() == 0 ? 1.0 : 0.0;
  return fixed_point(
      h, shift,
      [&](double t) {
        const auto [lo, hi] = split(h, t - shift);
        const double mu_lo = double(lo.sum / lo.n) + shift;
        const double mu_hi = double(hi.sum / hi.n) + shift;
        return (mu_lo - mu_hi) / (std::log(mu_lo) - std::log(mu_hi));
      },
      "Li");
}

double isodata_threshold(const Histogram& h) {
  require_two_values(h);
  return fixed_point(
      h, 0.0,
      [&](double t) {
        const auto [lo, hi] = split(h, t);
        return double((lo.sum / lo.n + hi.sum / hi.n) / 2);
      },
      "Isodata");
}

double mean_threshold(const Histogram& h) {
  if (h.total == 0) throw Error(ErrorCode::InvalidArgument, "mean threshold of an empty patch");
  return h.mean();
}

double threshold_value(Method m, const Histogram& h) {
  switch (m) {
    case Method::Otsu: return otsu_threshold(h);
    case Method::Li: return li_threshold(h);
    case Method::Isodata: return isodata_threshold(h);
    case Method::Mean: return mean_threshold(h);
  }
  return 0.0;
}

ThresholdResult apply_threshold(Method m, const BandImage& patch) {
  const Histogram h = Histogram::of(patch.data);
  ThresholdResult r;
  r.method = m;
  r.t = threshold_value(m, h);
  r.width = patch.width;
  r.height = patch.height;
  r.mask.resize(patch.size());
  for (std::size_t i = 0; i < patch.size(); ++i) r.mask[i] = double(patch.data[i]) > r.t;
  r.stats = class_stats(h, r.t);
  return r;
}

ThresholdResult threshold_otsu(const BandImage& patch) { return apply_threshold(Method::Otsu, patch); }
ThresholdResult threshold_li(const BandImage& patch) { return apply_threshold(Method::Li, patch); }
ThresholdResult threshold_isodata(const BandImage& patch) { return apply_threshold(Method::Isodata, patch); }
ThresholdResult threshold_mean(const BandImage& patch) { return apply_threshold(Method::Mean, patch); }

bool ConsensusMask::empty() const {
  return std::none_of(mask.begin(), mask.end(), [](std::uint8_t v) { return v != 0; });
}

ConsensusMask consensus(std::span<const ThresholdResult> maps) {
  if (maps.empty()) throw Error(ErrorCode::SizeMismatch, "consensus of no masks");
  ConsensusMask c;
  c.width = maps.front().width;
  c.height = maps.front().height;
  const std::size_t n = maps.front().mask.size();
  c.votes.assign(n, 0);
  for (const auto& m : maps) {
    if (m.width != c.width || m.height != c.height || m.mask.size() != n) {
      throw Error(ErrorCode::SizeMismatch, "threshold maps differ in size");
    }
    for (std::size_t i = 0; i < n; ++i) c.votes[i] += m.mask[i] ? 1 : 0;
  }
  c.mask.resize(n);
  for (std::size_t i = 0; i < n; ++i) c.mask[i] = c.votes[i] >= kConsensusVotes;
  return c;
}

ConsensusMask consensus_of(const BandImage& patch) {
  std::vector<ThresholdResult> maps;
  for (Method m : {Method::Otsu, Method::Li, Method::Isodata, Method::Mean}) {
    try {
      maps.push_back(apply_threshold(m, patch));
    } catch (const Error&) {
      ThresholdResult empty;
      empty.method = m;
      empty.width = patch.width;
      empty.height = patch.height;
      empty.mask.assign(patch.size(), 0);
      maps.push_back(std::move(empty));
    }
  }
  return consensus(maps);
}

}  // namespace rawsea::label
