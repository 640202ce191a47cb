#include <cmath>
#include <numbers>
#include <random>

#include "rawsea/error.hpp"
#include "rawsea/raster.hpp"

namespace rawsea {

namespace {

int wrap(int v, int n) {
  const int r = v % n;
  return r < 0 ? r + n : r;
}

BandImage hflip(const BandImage& in) {
  BandImage out(in.band_id, in.width, in.height);
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < in.width; ++x) out.at(x, y) = in.at(in.width - 1 - x, y);
  return out;
}

BandImage vflip(const BandImage& in) {
  BandImage out(in.band_id, in.width, in.height);
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < in.width; ++x) out.at(x, y) = in.at(x, in.height - 1 - y);
  return out;
}

BandImage toroidal_shift(const BandImage& in, int dx, int dy) {
  BandImage out(in.band_id, in.width, in.height);
  if (in.data.empty()) return out;
  for (int y = 0; y < in.height; ++y) {
    const int sy = wrap(y - dy, in.height);
    for (int x = 0; x < in.width; ++x) out.at(x, y) = in.at(wrap(x - dx, in.width), sy);
  }
  return out;
}

// Nearest-neighbour resampling through a destination->source map; samples
// falling outside the source are filled with 0 DN.
template <class Map>
BandImage resample(const BandImage& in, Map&& to_source) {
  BandImage out(in.band_id, in.width, in.height);
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      const auto [sx, sy] = to_source(double(x), double(y));
      if (!std::isfinite(sx) || !std::isfinite(sy)) continue;
      const long ix = std::lround(sx);
      const long iy = std::lround(sy);
      if (ix >= 0 && iy >= 0 && ix < in.width && iy < in.height) out.at(x, y) = in.at(int(ix), int(iy));
    }
  }
  return out;
}

BandImage rotate(const BandImage& in, double degrees) {
  if (!(std::abs(degrees) <= kMaxRotationDegrees)) {
    throw Error(ErrorCode::InvalidAngle, "rotation of " + std::to_string(degrees) + " degrees exceeds +/-40");
  }
  if (degrees == 0.0) return in;
  const double rad = degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(rad);
  const double sn = std::sin(rad);
  const double cx = 0.5 * (in.width - 1);
  const double cy = 0.5 * (in.height - 1);
  return resample(in, [&](double x, double y) {
    const double u = x - cx;
    const double v = y - cy;
    return std::pair{cs * u + sn * v + cx, -sn * u + cs * v + cy};
  });
}

// Solves the 8x8 system for the homography taking `from` corners to `to`.
std::array<double, 9> homography(const std::array<double, 8>& from, const std::array<double, 8>& to) {
  double a[8][9] = {};
  for (int i = 0; i < 4; ++i) {
    const double x = from[2 * i], y = from[2 * i + 1];
    const double u = to[2 * i], v = to[2 * i + 1];
    double* r0 = a[2 * i];
    double* r1 = a[2 * i + 1];
    r0[0] = x, r0[1] = y, r0[2] = 1, r0[6] = -u * x, r0[7] = -u * y, r0[8] = u;
    r1[3] = x, r1[4] = y, r1[5] = 1, r1[6] = -v * x, r1[7] = -v * y, r1[8] = v;
  }
  for (int col = 0; col < 8; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 8; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (std::abs(a[pivot][col]) < 1e-12) throw Error(ErrorCode::InvalidArgument, "degenerate perspective");
    if (pivot != col)
      for (int k = 0; k < 9; ++k) std::swap(a[col][k], a[pivot][k]);
    for (int r = 0; r < 8; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (int k = col; k < 9; ++k) a[r][k] -= f * a[col][k];
    }
  }
  std::array<double, 9> h{};
  for (int i = 0; i < 8; ++i) h[i] = a[i][8] / a[i][i];
  h[8] = 1.0;
  return h;
}

BandImage perspective(const BandImage& in, const std::array<double, 8>& offsets) {
  const double w = in.width - 1;
  const double h = in.height - 1;
  const std::array<double, 8> src{0, 0, w, 0, w, h, 0, h};
  std::array<double, 8> dst = src;
  for (int i = 0; i < 8; ++i) dst[i] += offsets[i];
  const auto m = homography(dst, src);
  return resample(in, [&](double x, double y) {
    const double d = m[6] * x + m[7] * y + m[8];
    return std::pair{(m[0] * x + m[1] * y + m[2]) / d, (m[3] * x + m[4] * y + m[5]) / d};
  });
}

}  // namespace

BandImage augment(const BandImage& band, const AugmentSpec& spec) {
  using namespace augment_ops;
  return std::visit(
      [&](const auto& op) -> BandImage {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, HFlip>) return hflip(band);
        if constexpr (std::is_same_v<T, VFlip>) return vflip(band);
        if constexpr (std::is_same_v<T, Rotate>) return rotate(band, op.degrees);
        if constexpr (std::is_same_v<T, ToroidalShift>) return toroidal_shift(band, op.dx, op.dy);
        if constexpr (std::is_same_v<T, Perspective>) return perspective(band, op.corner_offsets);
      },
      spec);
}

Granule augment(const Granule& g, const AugmentSpec& spec) {
  Granule out;
  out.id = g.id;
  out.meta = g.meta;
  out.bands.reserve(g.bands.size());
  for (const auto& b : g.bands) out.bands.push_back(augment(b, spec));
  return out;
}

AugmentSpec sample_augment(std::uint64_t seed, int width, int height, int max_shift) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, 4);
  switch (pick(rng)) {
    case 0: return augment_ops::HFlip{};
    case 1: return augment_ops::VFlip{};
    case 2: return augment_ops::Rotate{std::uniform_real_distribution<double>(-40.0, 40.0)(rng)};
    case 3: {
      std::uniform_int_distribution<int> s(-max_shift, max_shift);
      const int dx = s(rng);
      return augment_ops::ToroidalShift{dx, s(rng)};
    }
    default: {
      const double reach = 0.1 * std::min(width, height);
      std::uniform_real_distribution<double> off(-reach, reach);
      augment_ops::Perspective p;
      for (auto& o : p.corner_offsets) o = off(rng);
      return p;
    }
  }
}

}  // namespace rawsea
