#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <random>

#include "rawsea/error.hpp"
#include "rawsea/labeler.hpp"
#include "rawsea/threshold.hpp"
#include "rawsea_test.hpp"

using namespace rawsea;
using namespace rawsea::label;
using boost::multiprecision::cpp_rational;

namespace {

// Exhaustive Otsu: exact within-class variance sum_c (S2_c - S_c^2/n_c) at
// every distinct value, smallest t on ties.
double otsu_oracle(const std::vector<DN>& px) {
  std::map<DN, std::int64_t> hist;
  for (DN v : px) ++hist[v];
  std::int64_t n_all = 0;
  cpp_rational s_all = 0, q_all = 0;
  for (auto [v, c] : hist) {
    n_all += c;
    s_all += cpp_rational(std::int64_t(v) * c);
    q_all += cpp_rational(std::int64_t(v) * v * c);
  }
  std::int64_t n = 0;
  cpp_rational s = 0, q = 0;
  std::optional<cpp_rational> best;
  double best_t = 0;
  for (auto [v, c] : hist) {
    n += c;
    s += cpp_rational(std::int64_t(v) * c);
    q += cpp_rational(std::int64_t(v) * v * c);
    cpp_rational within = q - s * s / n;
    const std::int64_t n_hi = n_all - n;
    if (n_hi > 0) {
      const cpp_rational s_hi = s_all - s;
      within += (q_all - q) - s_hi * s_hi / n_hi;
    }
    if (!best || within < *best) {
      best = within;
      best_t = v;
    }
  }
  return best_t;
}

std::pair<double, double> class_means(const std::vector<DN>& px, double t) {
  double lo = 0, hi = 0;
  std::size_t nl = 0, nh = 0;
  for (DN v : px) {
    if (v <= t) lo += v, ++nl;
    else hi += v, ++nh;
  }
  return {lo / double(nl), hi / double(nh)};
}

BandImage patch_of(std::mt19937_64& rng, int w, int h) {
  // Mixtures of sea and a bright blob, or pure noise, with varied spread.
  std::uniform_int_distribution<int> kind(0, 2);
  std::normal_distribution<double> sea(std::uniform_real_distribution<double>(50, 800)(rng),
                                       std::uniform_real_distribution<double>(1, 60)(rng));
  BandImage b("B", w, h);
  const int k = kind(rng);
  const double bright = std::uniform_real_distribution<double>(900, 4000)(rng);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double v = sea(rng);
      if (k == 0 && x > w / 3 && x < w / 2 && y > h / 3 && y < 2 * h / 3) v = bright + sea(rng) - sea.mean();
      if (k == 1 && (x + y) % 7 == 0) v += bright / 3;
      b.at(x, y) = DN(std::clamp(std::lround(v), 0L, 4095L));
    }
  return b;
}

}  // namespace

TEST(Histogram, CountsDistinctValues) {
  const std::vector<DN> px{5, 1, 5, 3, 1, 5};
  const auto h = Histogram::of(px);
  EXPECT_EQ(h.values, (std::vector<DN>{1, 3, 5}));
  EXPECT_EQ(h.counts, (std::vector<std::uint64_t>{2, 1, 3}));
  EXPECT_EQ(h.total, 6u);
  EXPECT_DOUBLE_EQ(h.mean(), 20.0 / 6.0);
}

TEST(Histogram, LargeAndSmallPathsAgree) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> d(0, 4095);
  std::vector<DN> big(20000);
  for (auto& v : big) v = DN(d(rng));
  const auto h = Histogram::of(big);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < h.values.size(); ++i) {
    total += h.counts[i];
    if (i) EXPECT_LT(h.values[i - 1], h.values[i]);
  }
  EXPECT_EQ(total, big.size());
}

TEST(Otsu, TwoLevelPatch) {
  BandImage b("B", 4, 4, 100);
  for (int x = 0; x < 4; ++x) b.at(x, 0) = 900;
  const auto r = threshold_otsu(b);
  EXPECT_EQ(r.t, 100.0);
  EXPECT_EQ(std::count(r.mask.begin(), r.mask.end(), 1), 4);
  EXPECT_DOUBLE_EQ(r.stats.w_fg, 0.25);
  EXPECT_DOUBLE_EQ(*r.stats.mean_low, 100.0);
  EXPECT_DOUBLE_EQ(*r.stats.mean_high, 900.0);
  EXPECT_DOUBLE_EQ(r.stats.var_bg, 0.0);
}

TEST(Otsu, MatchesExhaustiveRationalSearchOn500Patches) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> side(4, 24);
  for (int i = 0; i < 500; ++i) {
    const BandImage b = patch_of(rng, side(rng), side(rng));
    const auto h = Histogram::of(b.data);
    if (h.constant()) continue;
    ASSERT_EQ(otsu_threshold(h), otsu_oracle(b.data)) << "patch " << i;
  }
}

TEST(Otsu, MinimisesWithinClassVarianceAmongAllCandidates) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const BandImage b = patch_of(rng, 16, 16);
    const auto h = Histogram::of(b.data);
    if (h.constant()) continue;
    const double t = otsu_threshold(h);
    const auto s = class_stats(h, t);
    const double best = s.w_bg * s.var_bg + s.w_fg * s.var_fg;
    for (DN v : h.values) {
      const auto o = class_stats(h, v);
      EXPECT_GE(o.w_bg * o.var_bg + o.w_fg * o.var_fg, best - 1e-9 * (1 + best));
    }
  }
}

TEST(Thresholds, ConstantPatchThrows) {
  const BandImage b("B", 8, 8, 321);
  for (Method m : {Method::Otsu, Method::Li, Method::Isodata}) {
    try {
      apply_threshold(m, b);
      FAIL() << to_string(m);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ConstantPatch);
    }
  }
  EXPECT_EQ(threshold_mean(b).t, 321.0);
  EXPECT_TRUE(consensus_of(b).empty());
}

TEST(Li, SatisfiesFixedPointWithinHalfDn) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 300; ++i) {
    const BandImage b = patch_of(rng, 16, 16);
    const auto h = Histogram::of(b.data);
    if (h.constant()) continue;
    const double t = li_threshold(h);
    const double shift = h.values.front() == 0 ? 1.0 : 0.0;
    auto [lo, hi] = class_means(b.data, t);
    lo += shift, hi += shift;
    const double next = (hi - lo) / (std::log(hi) - std::log(lo)) - shift;
    EXPECT_LT(std::abs(next - t), 0.5) << "patch " << i;
    EXPECT_GE(t, h.values.front());
    EXPECT_LT(t, h.values.back());
  }
}

TEST(Isodata, SatisfiesFixedPointWithinHalfDn) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 300; ++i) {
    const BandImage b = patch_of(rng, 16, 16);
    const auto h = Histogram::of(b.data);
    if (h.constant()) continue;
    const double t = isodata_threshold(h);
    const auto [lo, hi] = class_means(b.data, t);
    EXPECT_LT(std::abs((lo + hi) / 2 - t), 0.5) << "patch " << i;
  }
}

TEST(Isodata, ZeroHeavyPatch) {
  BandImage b("B", 10, 10, 0);
  b.at(3, 3) = 1000;
  b.at(4, 3) = 1010;
  const auto r = threshold_li(b);
  EXPECT_EQ(std::count(r.mask.begin(), r.mask.end(), 1), 2);
  const auto i = threshold_isodata(b);
  EXPECT_EQ(std::count(i.mask.begin(), i.mask.end(), 1), 2);
}

TEST(Mean, IsArithmeticMeanExactly) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 100; ++i) {
    const BandImage b = patch_of(rng, 9, 7);
    long double sum = 0;
    for (DN v : b.data) sum += v;
    EXPECT_DOUBLE_EQ(threshold_mean(b).t, double(sum / b.size()));
  }
}

TEST(Thresholds, MaskIsStrictlyAbove) {
  std::mt19937_64 rng(7);
  const BandImage b = patch_of(rng, 12, 12);
  for (Method m : {Method::Otsu, Method::Li, Method::Isodata, Method::Mean}) {
    const auto r = apply_threshold(m, b);
    for (std::size_t i = 0; i < b.size(); ++i) EXPECT_EQ(r.mask[i], double(b.data[i]) > r.t ? 1 : 0);
    EXPECT_NEAR(r.stats.w_bg + r.stats.w_fg, 1.0, 1e-12);
  }
}

TEST(Consensus, VoteCountOracle) {
  std::mt19937_64 rng(8);
  std::bernoulli_distribution coin(0.4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ThresholdResult> maps(4);
    for (auto& m : maps) {
      m.width = 5, m.height = 3;
      m.mask.resize(15);
      for (auto& v : m.mask) v = coin(rng);
    }
    const auto c = consensus(maps);
    for (std::size_t i = 0; i < 15; ++i) {
      int votes = 0;
      for (const auto& m : maps) votes += m.mask[i];
      EXPECT_EQ(c.votes[i], votes);
      EXPECT_EQ(c.mask[i], votes >= 2 ? 1 : 0);
    }
  }
}

TEST(Consensus, SizeMismatchThrows) {
  std::vector<ThresholdResult> maps(2);
  maps[0].width = 2, maps[0].height = 2, maps[0].mask.assign(4, 0);
  maps[1].width = 4, maps[1].height = 1, maps[1].mask.assign(4, 0);
  try {
    consensus(maps);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SizeMismatch);
  }
}

TEST(FitBBox, TightensCoarseBoxToVessel) {
  BandImage b("B", 60, 60, 100);
  for (int y = 20; y < 25; ++y)
    for (int x = 30; x < 42; ++x) b.at(x, y) = 900;
  const BBox fitted = fit_bbox({26, 16, 20, 14}, b);
  EXPECT_EQ(fitted, (BBox{30, 20, 12, 5}));
}

TEST(FitBBox, ConstantWindowReturnsCoarse) {
  const BandImage b("B", 40, 40, 100);
  const BBox coarse{5, 5, 10, 10};
  EXPECT_EQ(fit_bbox(coarse, b), coarse);
}

TEST(FitBBox, LargestComponentWins) {
  BandImage b("B", 60, 60, 100);
  for (int y = 10; y < 14; ++y)
    for (int x = 10; x < 22; ++x) b.at(x, y) = 900;
  b.at(30, 30) = 950;
  EXPECT_EQ(fit_bbox({8, 8, 24, 24}, b), (BBox{10, 10, 12, 4}));
}

TEST(FitBBox, NegativeMarginRejected) {
  const BandImage b("B", 10, 10, 1);
  EXPECT_THROW(fit_bbox({0, 0, 5, 5}, b, -1), Error);
}

TEST(RefineAnnotations, OneBoxPerBandPerCoarseBox) {
  Granule g;
  g.meta.bit_depth = 12;
  for (const char* id : {"B2", "B3"}) {
    BandImage b(id, 50, 50, 100);
    const int off = std::string(id) == "B3" ? 2 : 0;
    for (int y = 10; y < 14; ++y)
      for (int x = 10 + off; x < 20 + off; ++x) b.at(x, y) = 800;
    g.bands.push_back(b);
  }
  const auto r = refine_annotations(g, {{8, 8, 16, 8}});
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r.at("B2").front(), (BBox{10, 10, 10, 4}));
  EXPECT_EQ(r.at("B3").front(), (BBox{12, 10, 10, 4}));
}
