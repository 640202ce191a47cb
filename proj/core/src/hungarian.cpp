#include "rawsea/hungarian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rawsea/error.hpp"

namespace rawsea::ais {

double Assignment::total_cost() const {
  double s = 0.0;
  for (const auto& m : matches) s += m.cost;
  return s;
}

Assignment hungarian(std::span<const double> costs, std::size_t n, std::size_t m) {
  if (n == 0 || m == 0) throw Error(ErrorCode::InvalidArgument, "assignment needs at least one row and one column");
  if (costs.size() != n * m) throw Error(ErrorCode::SizeMismatch, "cost buffer does not match n*m");
  double max_finite = 0.0;
  for (double c : costs) {
    if (std::isnan(c) || c < 0.0) throw Error(ErrorCode::InvalidArgument, "costs must be non-negative or the sentinel");
    if (std::isfinite(c)) max_finite = std::max(max_finite, c);
  }
  const std::size_t k = std::max(n, m);
  const double pad = 10.0 * max_finite + 1.0;
  // Any assignment with one sentinel fewer is cheaper than every finite rearrangement.
  const double big = double(k) * pad + 1.0;

  // a is 1-indexed, (k+1) x (k+1).
  const auto a = [&](std::size_t i, std::size_t j) -> double {
    if (i > n || j > m) return pad;
    const double c = costs[(i - 1) * m + (j - 1)];
    return std::isfinite(c) ? c : big;
  };

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(k + 1, 0.0), v(k + 1, 0.0), minv(k + 1);
  std::vector<std::size_t> p(k + 1, 0), way(k + 1, 0);
  std::vector<char> used(k + 1);
  for (std::size_t i = 1; i <= k; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= k; ++j) {
        if (used[j]) continue;
        const double cur = a(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= k; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> row_to_col(n, m);
  for (std::size_t j = 1; j <= m; ++j) {
    const std::size_t i = p[j];
    if (i >= 1 && i <= n && std::isfinite(costs[(i - 1) * m + (j - 1)])) row_to_col[i - 1] = j - 1;
  }
  Assignment out;
  std::vector<char> col_used(m, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (row_to_col[i] == m) {
      out.unmatched_rows.push_back(i);
    } else {
      out.matches.push_back({i, row_to_col[i], costs[i * m + row_to_col[i]]});
      col_used[row_to_col[i]] = 1;
    }
  }
  for (std::size_t j = 0; j < m; ++j)
    if (!col_used[j]) out.unmatched_cols.push_back(j);
  return out;
}

Assignment hungarian(const CostMatrix& c) { return hungarian(c.costs, c.rows, c.cols); }

}  // namespace rawsea::ais
