#pragma once

#include <string>
#include <vector>

namespace rawsea::svg {

struct Series {
  std::string name;
  std::vector<double> values;
};

/// Grouped vertical bars, one group per category.
std::string bar_chart(const std::string& title, const std::vector<std::string>& categories,
                      const std::vector<Series>& series);

/// Polylines over a shared x axis.
std::string line_chart(const std::string& title, const std::string& x_label, const std::vector<double>& x,
                       const std::vector<Series>& series);

/// k x k heatmap, row-major values, colour scaled to [vmin, vmax].
std::string heatmap(const std::string& title, const std::vector<std::string>& labels,
                    const std::vector<double>& values, double vmin, double vmax);

}  // namespace rawsea::svg
