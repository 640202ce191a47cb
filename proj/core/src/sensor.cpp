#include "rawsea/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "rawsea/error.hpp"
#include "rawsea/svg.hpp"

namespace rawsea::sensor {

namespace {

constexpr double kNyquistTolerance = 0.02;
constexpr double kTailEpsilon = 1e-12;

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double unit_open(std::uint64_t bits) { return (double(bits >> 11) + 0.5) * 0x1.0p-53; }

// Mirror about the edge pixel: -1 -> 1, w -> w - 2.
int reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

DN round_clamp(double v, int bit_depth) {
  const double hi = double((1u << bit_depth) - 1u);
  return DN(std::clamp(std::nearbyint(v), 0.0, hi));
}

void check_bit_depth(int bit_depth) {
  if (bit_depth < 1 || bit_depth > 16) throw Error(ErrorCode::InvalidArgument, "bit_depth must be in [1,16]");
}

}  // namespace

void MtfSpec::validate() const {
  if (!(m_nyquist > 0.0 && m_nyquist < 1.0)) throw Error(ErrorCode::InvalidArgument, "m_nyquist must be in (0, 1)");
  if (kernel_size < 3 || kernel_size % 2 == 0) throw Error(ErrorCode::InvalidArgument, "kernel size must be odd and >= 3");
}

void NoiseSpec::validate() const {
  if (!(snr > 0.0)) throw Error(ErrorCode::InvalidArgument, "snr must be > 0");
  if (!(dn_ref > 0.0) || !std::isfinite(dn_ref)) throw Error(ErrorCode::InvalidArgument, "dn_ref must be > 0");
}

double mtf_curve(const MtfSpec& spec, double k) {
  if (!(k >= 0.0)) throw Error(ErrorCode::InvalidArgument, "frequency must be >= 0");
  if (k == 0.0) return 1.0;
  if (k == 1.0) return spec.m_nyquist;
  return std::exp(std::log(spec.m_nyquist) * k * k);
}

double continuous_sigma(double m_nyquist) {
  return std::sqrt(-std::log(m_nyquist)) / (std::numbers::pi * kNyquist * std::numbers::sqrt2);
}

double discrete_scale(double m_nyquist) { return -std::log(m_nyquist) / 2.0; }

std::vector<double> discrete_gaussian(double t, int radius) {
  if (radius < 0 || !(t >= 0.0)) throw Error(ErrorCode::InvalidArgument, "invalid discrete Gaussian");
  std::vector<double> k(std::size_t(2 * radius + 1), 0.0);
  if (t == 0.0) {
    k[std::size_t(radius)] = 1.0;
    return k;
  }
  const double damp = std::exp(-t);
  for (int n = 0; n <= radius; ++n) {
    const double v = damp * std::cyl_bessel_i(double(n), t);
    k[std::size_t(radius + n)] = v;
    k[std::size_t(radius - n)] = v;
  }
  double sum = 0.0;
  for (double v : k) sum += v;
  for (double& v : k) v /= sum;
  return k;
}

double kernel_response(std::span<const double> kernel, int n, double fx, double fy) {
  const int r = n / 2;
  double re = 0.0;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      re += kernel[std::size_t(y) * n + x] * std::cos(2.0 * std::numbers::pi * (fx * (x - r) + fy * (y - r)));
  return re;
}

std::vector<double> psf_kernel(const MtfSpec& spec) {
  spec.validate();
  const int n = spec.kernel_size;
  const auto k1 = discrete_gaussian(discrete_scale(spec.m_nyquist), n / 2);
  std::vector<double> k(std::size_t(n) * n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) k[std::size_t(y) * n + x] = k1[std::size_t(y)] * k1[std::size_t(x)];
  const double response = kernel_response(k, n, kNyquist, 0.0);
  if (std::abs(response - spec.m_nyquist) > kNyquistTolerance * spec.m_nyquist) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%dx%d kernel gives %.4f at Nyquist for M = %.4f; raise the kernel size", n, n,
                  response, spec.m_nyquist);
    throw Error(ErrorCode::KernelTooSmall, buf);
  }
  return k;
}

BandImage retarget_mtf(const BandImage& band, const MtfSpec& source, const MtfSpec& target, int bit_depth) {
  source.validate();
  target.validate();
  check_bit_depth(bit_depth);
  if (target.m_nyquist > source.m_nyquist) {
    throw Error(ErrorCode::SharpeningRequested, "target MTF is sharper than the source");
  }
  const double t = discrete_scale(target.m_nyquist) - discrete_scale(source.m_nyquist);
  BandImage out(band.band_id, band.width, band.height);
  if (t <= 0.0 || band.size() == 0) {
    out.data = band.data;
    return out;
  }
  int radius = target.kernel_size / 2;
  while (std::exp(-t) * std::cyl_bessel_i(double(radius + 1), t) > kTailEpsilon) ++radius;
  const auto k = discrete_gaussian(t, radius);

  const int w = band.width, h = band.height;
  std::vector<double> tmp(band.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int d = -radius; d <= radius; ++d) s += k[std::size_t(d + radius)] * band.at(reflect(x + d, w), y);
      tmp[std::size_t(y) * w + x] = s;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int d = -radius; d <= radius; ++d) s += k[std::size_t(d + radius)] * tmp[std::size_t(reflect(y + d, h)) * w + x];
      out.at(x, y) = round_clamp(s, bit_depth);
    }
  return out;
}

std::vector<double> noise_field(std::size_t count, const NoiseSpec& spec) {
  spec.validate();
  std::vector<double> z(count, 0.0);
  const double sigma = spec.sigma();
  if (!std::isfinite(spec.snr) || sigma == 0.0) return z;
  const std::uint64_t key = splitmix(spec.seed);
  for (std::size_t i = 0; i < count; ++i) {
    const double u1 = unit_open(splitmix(key + 2 * std::uint64_t(i)));
    const double u2 = unit_open(splitmix(key + 2 * std::uint64_t(i) + 1));
    z[i] = sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  return z;
}

BandImage add_noise(const BandImage& band, const NoiseSpec& spec, int bit_depth) {
  check_bit_depth(bit_depth);
  const auto z = noise_field(band.size(), spec);
  BandImage out(band.band_id, band.width, band.height);
  for (std::size_t i = 0; i < band.size(); ++i) out.data[i] = round_clamp(band.data[i] + z[i], bit_depth);
  return out;
}

Granule degrade(const Granule& g, const MtfSpec& source, double target_m, const NoiseSpec& noise) {
  MtfSpec target = source;
  target.m_nyquist = target_m;
  Granule out;
  out.id = g.id;
  out.meta = g.meta;
  for (std::size_t k = 0; k < g.bands.size(); ++k) {
    NoiseSpec band_noise = noise;
    band_noise.seed = splitmix(noise.seed ^ splitmix(k + 1));
    out.bands.push_back(add_noise(retarget_mtf(g.bands[k], source, target, g.meta.bit_depth), band_noise,
                                  g.meta.bit_depth));
  }
  return out;
}

nlohmann::json SweepResult::to_json() const {
  nlohmann::json j;
  j["mtf"] = mtf;
  j["snr"] = nlohmann::json::array();
  for (double s : snr) j["snr"].push_back(std::isfinite(s) ? nlohmann::json(s) : nlohmann::json("inf"));
  j["cells"] = nlohmann::json::array();
  for (const auto& c : cells) {
    j["cells"].push_back({{"m", c.m},
                          {"snr", std::isfinite(c.snr) ? nlohmann::json(c.snr) : nlohmann::json("inf")},
                          {"precision", c.precision},
                          {"recall", c.recall},
                          {"f1", c.f1}});
  }
  return j;
}

SweepResult degradation_sweep(const std::vector<Granule>& granules, const MtfSpec& source,
                              std::span<const double> mtf_grid, std::span<const double> snr_grid, double dn_ref,
                              std::uint64_t seed, const EvalFn& eval_fn) {
  SweepResult r;
  r.mtf.assign(mtf_grid.begin(), mtf_grid.end());
  r.snr.assign(snr_grid.begin(), snr_grid.end());
  for (double m : mtf_grid) {
    for (double snr : snr_grid) {
      std::vector<Granule> degraded;
      degraded.reserve(granules.size());
      for (std::size_t gi = 0; gi < granules.size(); ++gi) {
        degraded.push_back(degrade(granules[gi], source, m, NoiseSpec{snr, dn_ref, splitmix(seed + gi)}));
      }
      const auto counts = eval_fn(degraded);
      r.cells.push_back({m, snr, counts.precision(), counts.recall(), counts.f1()});
    }
  }
  return r;
}

std::vector<std::filesystem::path> write_sweep(const SweepResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  const auto write = [&](const std::string& name, const std::string& text) {
    const auto p = dir / name;
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::Io, "cannot write " + p.string());
    f << text;
    written.push_back(p);
  };
  write("sweep.json", r.to_json().dump(2) + "\n");
  std::vector<double> x;
  for (double s : r.snr) x.push_back(std::isfinite(s) ? s : 0.0);
  for (const char* metric : {"precision", "recall", "f1"}) {
    std::vector<svg::Series> series;
    for (std::size_t i = 0; i < r.mtf.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "M = %.2f", r.mtf[i]);
      svg::Series s{name, {}};
      for (std::size_t j = 0; j < r.snr.size(); ++j) {
        const auto& c = r.cells[i * r.snr.size() + j];
        const std::string m = metric;
        s.values.push_back(m == "precision" ? c.precision : m == "recall" ? c.recall : c.f1);
      }
      series.push_back(std::move(s));
    }
    write(std::string("sweep_") + metric + ".svg", svg::line_chart(metric, "SNR", x, series));
  }
  return written;
}

}  // namespace rawsea::sensor
