#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "rawsea/metrics.hpp"
#include "rawsea/raster.hpp"

namespace rawsea::sensor {

inline constexpr double kNyquist = 0.5;  // cycles per pixel
inline constexpr double kBaselineSnr = 174.0;
inline constexpr double kDefaultDnRef = 100.0;

struct MtfSpec {
  double m_nyquist = 0.3;
  int kernel_size = 7;

  void validate() const;
};

struct NoiseSpec {
  double snr = kBaselineSnr;
  double dn_ref = kDefaultDnRef;
  std::uint64_t seed = 0;

  void validate() const;
  double sigma() const { return dn_ref / snr; }
};

/// exp(ln(M) * k^2), k in units of the Nyquist frequency.
double mtf_curve(const MtfSpec& spec, double k);

/// Width of the continuous Gaussian PSF with MTF M at Nyquist.
double continuous_sigma(double m_nyquist);

/// Scale t of the discrete Gaussian e^{-t} I_n(t) whose response at
/// Nyquist is exactly M: t = -ln(M) / 2.
double discrete_scale(double m_nyquist);

/// Normalized 1-D discrete Gaussian of scale t on [-radius, radius].
std::vector<double> discrete_gaussian(double t, int radius);

/// Row-major n x n kernel (separable discrete Gaussian). Throws
/// KernelTooSmall when its Nyquist response misses M by more than 2%.
std::vector<double> psf_kernel(const MtfSpec& spec);

/// Real part of the 2-D DFT of an n x n centred kernel at (fx, fy) cycles/px.
double kernel_response(std::span<const double> kernel, int n, double fx, double fy);

/// Single blur from source to target Nyquist MTF (target <= source),
/// reflect padding, rounded and clamped to bit_depth.
BandImage retarget_mtf(const BandImage& band, const MtfSpec& source, const MtfSpec& target, int bit_depth = 12);

/// Zero-mean Gaussian field of std dn_ref/snr keyed by (seed, pixel index).
std::vector<double> noise_field(std::size_t count, const NoiseSpec& spec);

/// band + noise_field, rounded and clamped to [0, 2^bit_depth - 1].
/// An infinite snr leaves the band unchanged.
BandImage add_noise(const BandImage& band, const NoiseSpec& spec, int bit_depth = 12);

/// Retargets every band and then adds noise.
Granule degrade(const Granule& g, const MtfSpec& source, double target_m, const NoiseSpec& noise);

struct SweepCell {
  double m = 0.0;
  double snr = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct SweepResult {
  std::vector<double> mtf;
  std::vector<double> snr;
  std::vector<SweepCell> cells;  ///< mtf-major

  nlohmann::json to_json() const;
};

using EvalFn = std::function<eval::DetectionCounts(const std::vector<Granule>& degraded)>;

/// Evaluates eval_fn on every (M, SNR) combination.
SweepResult degradation_sweep(const std::vector<Granule>& granules, const MtfSpec& source,
                              std::span<const double> mtf_grid, std::span<const double> snr_grid,
                              double dn_ref, std::uint64_t seed, const EvalFn& eval_fn);

/// sweep.json plus sweep_precision.svg, sweep_recall.svg, sweep_f1.svg.
std::vector<std::filesystem::path> write_sweep(const SweepResult& r, const std::filesystem::path& dir);

}  // namespace rawsea::sensor
