#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rawsea/raster.hpp"

namespace rawsea::label {

/// Sorted distinct DN values with their counts.
struct Histogram {
  std::vector<DN> values;
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  static Histogram of(std::span<const DN> pixels);
  bool constant() const { return values.size() < 2; }
  double mean() const;
};

enum class Method { Otsu, Li, Isodata, Mean };
std::string_view to_string(Method m);

/// Class statistics at threshold t; background is DN <= t, foreground DN > t.
struct ClassStats {
  double w_bg = 0.0;
  double w_fg = 0.0;
  double var_bg = 0.0;
  double var_fg = 0.0;
  std::optional<double> mean_low;   ///< m_L, absent when the background is empty
  std::optional<double> mean_high;  ///< m_H, absent when the foreground is empty
};

ClassStats class_stats(const Histogram& h, double t);

// Threshold values from a histogram. Otsu/Li/Isodata throw ConstantPatch on
// fewer than two distinct values; Li/Isodata throw NonConvergence after
// kMaxIterations.
inline constexpr int kMaxIterations = 64;
inline constexpr double kConvergence = 0.5;

double otsu_threshold(const Histogram& h);
double li_threshold(const Histogram& h);
double isodata_threshold(const Histogram& h);
double mean_threshold(const Histogram& h);
double threshold_value(Method m, const Histogram& h);

struct ThresholdResult {
  Method method = Method::Otsu;
  double t = 0.0;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> mask;  ///< 1 where DN > t
  ClassStats stats;
};

ThresholdResult threshold_otsu(const BandImage& patch);
ThresholdResult threshold_li(const BandImage& patch);
ThresholdResult threshold_isodata(const BandImage& patch);
ThresholdResult threshold_mean(const BandImage& patch);
ThresholdResult apply_threshold(Method m, const BandImage& patch);

struct ConsensusMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> votes;  ///< 0..4
  std::vector<std::uint8_t> mask;   ///< votes >= 2

  bool empty() const;
};

inline constexpr int kConsensusVotes = 2;

/// Throws SizeMismatch when the masks disagree in shape.
ConsensusMask consensus(std::span<const ThresholdResult> maps);

/// Runs all four methods on the patch; a method that throws contributes an
/// empty map. Constant patches yield an empty consensus.
ConsensusMask consensus_of(const BandImage& patch);

}  // namespace rawsea::label
