#include <gtest/gtest.h>

#include <random>
#include <set>

#include "rawsea/error.hpp"
#include "rawsea/hungarian.hpp"
#include "rawsea_test.hpp"

using namespace rawsea;
using namespace rawsea::ais;

namespace {

constexpr double kInf = CostMatrix::kSentinel;

void expect_one_to_one(const Assignment& a, std::size_t n, std::size_t m) {
  std::set<std::size_t> rows, cols;
  for (const auto& mt : a.matches) {
    EXPECT_TRUE(rows.insert(mt.row).second);
    EXPECT_TRUE(cols.insert(mt.col).second);
    EXPECT_LT(mt.row, n);
    EXPECT_LT(mt.col, m);
    EXPECT_TRUE(std::isfinite(mt.cost));
  }
  for (auto r : a.unmatched_rows) EXPECT_TRUE(rows.insert(r).second);
  for (auto c : a.unmatched_cols) EXPECT_TRUE(cols.insert(c).second);
  EXPECT_EQ(rows.size(), n);
  EXPECT_EQ(cols.size(), m);
}

}  // namespace

TEST(Hungarian, OneByOne) {
  const auto a = hungarian(std::vector<double>{5}, 1, 1);
  ASSERT_EQ(a.matches.size(), 1u);
  EXPECT_EQ(a.matches[0], (Match{0, 0, 5}));
}

TEST(Hungarian, ThreeByThreeExample) {
  const std::vector<double> c{4, 1, 3, 2, 0, 5, 3, 2, 2};
  const auto a = hungarian(c, 3, 3);
  ASSERT_EQ(a.matches.size(), 3u);
  EXPECT_EQ(a.matches[0].col, 1u);
  EXPECT_EQ(a.matches[1].col, 0u);
  EXPECT_EQ(a.matches[2].col, 2u);
  EXPECT_EQ(a.total_cost(), 5.0);
}

TEST(Hungarian, AllSentinel) {
  const std::vector<double> c(6, kInf);
  const auto a = hungarian(c, 2, 3);
  EXPECT_TRUE(a.matches.empty());
  EXPECT_EQ(a.unmatched_rows, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(a.unmatched_cols, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Hungarian, RectangularLeavesExtrasUnmatched) {
  const std::vector<double> c{10, 1, 7, 2, 9, 3};  // 3 rows x 2 cols
  const auto a = hungarian(c, 3, 2);
  EXPECT_EQ(a.matches.size(), 2u);
  EXPECT_EQ(a.total_cost(), 8.0);  // (0,1) + (1,0)
  EXPECT_EQ(a.unmatched_rows, (std::vector<std::size_t>{2}));
  EXPECT_TRUE(a.unmatched_cols.empty());
}

TEST(Hungarian, SentinelPreferredLeftUnmatchedOverExpensiveFiniteLoss) {
  // Row 0 can only go to col 0; maximising finite pairs forces row 1 to col 1.
  const std::vector<double> c{5, kInf, 1, 100};
  const auto a = hungarian(c, 2, 2);
  ASSERT_EQ(a.matches.size(), 2u);
  EXPECT_EQ(a.total_cost(), 105.0);
}

TEST(Hungarian, EmptyDimensionsRejected) {
  EXPECT_THROW(hungarian(std::vector<double>{}, 0, 3), Error);
  EXPECT_THROW(hungarian(std::vector<double>{}, 2, 0), Error);
  EXPECT_THROW(hungarian(std::vector<double>{1, 2}, 2, 2), Error);
}

TEST(Hungarian, NegativeOrNanCostsRejected) {
  EXPECT_THROW(hungarian(std::vector<double>{-1}, 1, 1), Error);
  EXPECT_THROW(hungarian(std::vector<double>{std::nan("")}, 1, 1), Error);
}

TEST(Hungarian, EqualsExhaustiveSearchOn1000RandomMatrices) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(1, 6), cost(0, 50);
  std::bernoulli_distribution sentinel(0.2);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = dim(rng), m = dim(rng);
    std::vector<double> c(n * m);
    for (auto& v : c) v = sentinel(rng) ? kInf : double(cost(rng));
    const auto a = hungarian(c, n, m);
    const auto [pairs, total] = rawsea::testing::brute_force_assignment(c, n, m);
    ASSERT_EQ(a.matches.size(), pairs) << "trial " << trial;
    ASSERT_EQ(a.total_cost(), total) << "trial " << trial;
    expect_one_to_one(a, n, m);
    for (const auto& mt : a.matches) EXPECT_EQ(mt.cost, c[mt.row * m + mt.col]);
  }
}

TEST(Hungarian, RealValuedCostsAgreeWithExhaustiveSearch) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> dim(1, 6);
  std::uniform_real_distribution<double> cost(0, 2000);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = dim(rng), m = dim(rng);
    std::vector<double> c(n * m);
    for (auto& v : c) v = cost(rng);
    const auto a = hungarian(c, n, m);
    const auto [pairs, total] = rawsea::testing::brute_force_assignment(c, n, m);
    EXPECT_EQ(a.matches.size(), pairs);
    EXPECT_NEAR(a.total_cost(), total, 1e-9 * (1 + total));
  }
}

TEST(Hungarian, ScalingLeavesUniqueOptimumUnchanged) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> dim(2, 6);
  std::uniform_real_distribution<double> cost(0, 1000), scale(0.01, 100);
  int tested = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = dim(rng), m = dim(rng);
    std::vector<double> c(n * m);
    for (auto& v : c) v = std::round(cost(rng));
    // Random continuous perturbations make ties vanishingly unlikely.
    for (auto& v : c) v += cost(rng) * 1e-4;
    const auto a = hungarian(c, n, m);
    const double k = scale(rng);
    std::vector<double> s(c);
    for (auto& v : s) v *= k;
    const auto b = hungarian(s, n, m);
    ASSERT_EQ(a.matches.size(), b.matches.size());
    for (std::size_t i = 0; i < a.matches.size(); ++i) {
      EXPECT_EQ(a.matches[i].row, b.matches[i].row);
      EXPECT_EQ(a.matches[i].col, b.matches[i].col);
    }
    ++tested;
  }
  EXPECT_EQ(tested, 200);
}

TEST(Hungarian, CostMatrixOverload) {
  CostMatrix c(2, 2);
  c.at(0, 0) = 3, c.at(0, 1) = 1, c.at(1, 0) = 1;
  const auto a = hungarian(c);
  ASSERT_EQ(a.matches.size(), 2u);
  EXPECT_EQ(a.total_cost(), 2.0);
  // Cell (1,1) stays sentinel.
  EXPECT_TRUE(CostMatrix::is_sentinel(c.at(1, 1)));
}

TEST(Hungarian, LargeRandomIsOneToOne) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> cost(0, 1);
  const std::size_t n = 150, m = 120;
  std::vector<double> c(n * m);
  for (auto& v : c) v = cost(rng);
  const auto a = hungarian(c, n, m);
  EXPECT_EQ(a.matches.size(), m);
  expect_one_to_one(a, n, m);
}
