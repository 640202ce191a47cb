#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rawsea/time.hpp"

namespace rawsea {

using DN = std::uint16_t;

/// One spectral band: row-major 16-bit digital numbers.
struct BandImage {
  std::string band_id;
  int width = 0;
  int height = 0;
  std::vector<DN> data;

  BandImage() = default;
  BandImage(std::string id, int w, int h, DN fill = 0);
  BandImage(std::string id, int w, int h, std::vector<DN> pixels);

  DN at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  DN& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return data.size(); }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }

  friend bool operator==(const BandImage&, const BandImage&) = default;
};

/// Pixel -> projected-meter affine map:
///   x_m = c[0] + c[1]*col + c[2]*row
///   y_m = c[3] + c[4]*col + c[5]*row
struct Geotransform {
  std::array<double, 6> c{0.0, 1.0, 0.0, 0.0, 0.0, -1.0};

  struct Point {
    double x = 0.0;
    double y = 0.0;
  };

  Point apply(double col, double row) const {
    return {c[0] + c[1] * col + c[2] * row, c[3] + c[4] * col + c[5] * row};
  }
  double determinant() const { return c[1] * c[5] - c[2] * c[4]; }
  bool invertible() const { return determinant() != 0.0; }
  /// Inverse map, meters -> (col, row). Throws if singular.
  Point invert(double x_m, double y_m) const;
  /// Geotransform of a sub-window whose (0,0) sits at parent (col0,row0).
  Geotransform translated(double col0, double row0) const;

  friend bool operator==(const Geotransform&, const Geotransform&) = default;
};

enum class Sensor { S2, VENUS, OTHER };

std::string to_string(Sensor s);
Sensor sensor_from_string(const std::string& s);

struct GranuleMeta {
  UtcTime sensing_time{};
  double resolution_m = 10.0;
  int bit_depth = 12;
  Geotransform geotransform{};
  Sensor sensor = Sensor::OTHER;
  std::optional<std::string> detector_id;

  DN max_dn() const { return static_cast<DN>((1u << bit_depth) - 1u); }

  friend bool operator==(const GranuleMeta&, const GranuleMeta&) = default;
};

/// All bands of one detector acquisition, resampled to a common grid.
struct Granule {
  std::string id;
  std::vector<BandImage> bands;
  GranuleMeta meta;

  int width() const { return bands.empty() ? 0 : bands.front().width; }
  int height() const { return bands.empty() ? 0 : bands.front().height; }
  const BandImage& band(const std::string& band_id) const;
  BandImage& band(const std::string& band_id);
  const BandImage* find_band(const std::string& band_id) const;
  std::vector<std::string> band_ids() const;

  /// Throws DimensionMismatch / BitDepthViolation / InvalidArgument.
  void validate() const;

  friend bool operator==(const Granule&, const Granule&) = default;
};

/// Axis-aligned box, top-left origin, in pixels.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double x_max() const { return x + w; }
  double y_max() const { return y + h; }
  double area() const { return w * h; }
  double cx() const { return x + 0.5 * w; }
  double cy() const { return y + 0.5 * h; }
  bool valid() const { return w > 0.0 && h > 0.0; }
  BBox expanded(double margin) const { return {x - margin, y - margin, w + 2 * margin, h + 2 * margin}; }
  /// Intersection with [0,width]x[0,height]; may be empty (w or h <= 0).
  BBox clamped(int width, int height) const;

  friend bool operator==(const BBox&, const BBox&) = default;
};

/// Integer pixel range [x0,x1) x [y0,y1) covered by a box, clipped to an image.
struct PixelRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool empty() const { return x1 <= x0 || y1 <= y0; }
  BBox to_bbox() const { return {double(x0), double(y0), double(x1 - x0), double(y1 - y0)}; }
};

/// Pixels whose centres or extent fall in the box: floor(x) .. ceil(x+w).
PixelRect pixel_rect(const BBox& box, int width, int height);

/// Sub-image copy; rect must be inside the band.
BandImage extract(const BandImage& band, const PixelRect& rect);

// ---------------------------------------------------------------------------
// Granule storage: <dir>/meta.json plus <dir>/<band>.tif (16-bit grayscale).

enum class TiffCompression { None, Deflate };

Granule load_granule(const std::filesystem::path& dir);
void write_granule(const Granule& g, const std::filesystem::path& dir,
                   TiffCompression compression = TiffCompression::Deflate);

/// Reads meta.json only; returns (id, declared band list, meta).
struct MetaFile {
  std::string id;
  std::vector<std::string> bands;
  GranuleMeta meta;
};
MetaFile read_meta(const std::filesystem::path& meta_json);

// ---------------------------------------------------------------------------
// Pixel-domain transforms.

Granule crop(const Granule& g, const BBox& box);

namespace augment_ops {
struct HFlip {};
struct VFlip {};
struct Rotate {
  double degrees = 0.0;
};
struct ToroidalShift {
  int dx = 0;
  int dy = 0;
};
/// Destination corners = source corners + offsets, in pixel units, ordered
/// top-left, top-right, bottom-right, bottom-left.
struct Perspective {
  std::array<double, 8> corner_offsets{};
};
}  // namespace augment_ops

using AugmentSpec = std::variant<augment_ops::HFlip, augment_ops::VFlip, augment_ops::Rotate,
                                 augment_ops::ToroidalShift, augment_ops::Perspective>;

inline constexpr double kMaxRotationDegrees = 40.0;

BandImage augment(const BandImage& band, const AugmentSpec& spec);
Granule augment(const Granule& g, const AugmentSpec& spec);

/// Draws one augmentation from the training policy (flips, rotations up to
/// 40 degrees, toroidal shifts within max_shift, mild perspective).
AugmentSpec sample_augment(std::uint64_t seed, int width, int height, int max_shift = 16);

/// Linear percentile stretch to 8 bits. Constant input maps to 128.
std::vector<std::uint8_t> stretch_to_u8(const BandImage& band, double lo_pct, double hi_pct);
/// As above, encoded as a grayscale PNG.
std::vector<std::uint8_t> stretch_to_png(const BandImage& band, double lo_pct, double hi_pct);

/// Nearest-rank percentile of the band's DN values (p in [0,100]).
DN percentile(const BandImage& band, double p);

}  // namespace rawsea
