#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rawsea/ais.hpp"

namespace rawsea::ais {

struct Match {
  std::size_t row = 0;
  std::size_t col = 0;
  double cost = 0.0;

  friend bool operator==(const Match&, const Match&) = default;
};

struct Assignment {
  std::vector<Match> matches;  ///< ascending row
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_cols;

  double total_cost() const;
};

/// Exact minimum-cost assignment (shortest augmenting paths, O(k^3) with
/// k = max(n, m)). Sentinel entries are used only when unavoidable and are
/// then reported unmatched, so the result maximises the number of finite
/// pairs and, among those, minimises their total cost. Requires n, m >= 1.
Assignment hungarian(std::span<const double> costs, std::size_t n, std::size_t m);
Assignment hungarian(const CostMatrix& c);

}  // namespace rawsea::ais
