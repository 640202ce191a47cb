#include "rawsea/raster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "rawsea/error.hpp"
#include "rawsea/png.hpp"
#include "rawsea/tiff.hpp"

namespace rawsea {

using nlohmann::json;

BandImage::BandImage(std::string id, int w, int h, DN fill)
    : band_id(std::move(id)), width(w), height(h), data(std::size_t(std::max(w, 0)) * std::max(h, 0), fill) {}

BandImage::BandImage(std::string id, int w, int h, std::vector<DN> pixels)
    : band_id(std::move(id)), width(w), height(h), data(std::move(pixels)) {
  if (w < 0 || h < 0 || data.size() != std::size_t(w) * std::size_t(h)) {
    throw Error(ErrorCode::DimensionMismatch, "band '" + band_id + "': data length != width*height");
  }
}

Geotransform::Point Geotransform::invert(double x_m, double y_m) const {
  const double det = determinant();
  if (det == 0.0) throw Error(ErrorCode::InvalidArgument, "geotransform is singular");
  const double dx = x_m - c[0];
  const double dy = y_m - c[3];
  return {(c[5] * dx - c[2] * dy) / det, (-c[4] * dx + c[1] * dy) / det};
}

Geotransform Geotransform::translated(double col0, double row0) const {
  Geotransform g = *this;
  const Point origin = apply(col0, row0);
  g.c[0] = origin.x;
  g.c[3] = origin.y;
  return g;
}

std::string to_string(Sensor s) {
  switch (s) {
    case Sensor::S2: return "S2";
    case Sensor::VENUS: return "VENUS";
    case Sensor::OTHER: return "OTHER";
  }
  return "OTHER";
}

Sensor sensor_from_string(const std::string& s) {
  if (s == "S2") return Sensor::S2;
  if (s == "VENUS") return Sensor::VENUS;
  if (s == "OTHER") return Sensor::OTHER;
  throw Error(ErrorCode::Format, "unknown sensor '" + s + "'");
}

const BandImage* Granule::find_band(const std::string& band_id) const {
  for (const auto& b : bands) {
    if (b.band_id == band_id) return &b;
  }
  return nullptr;
}

const BandImage& Granule::band(const std::string& band_id) const {
  if (const auto* b = find_band(band_id)) return *b;
  throw Error(ErrorCode::MissingBand, "granule '" + id + "' has no band '" + band_id + "'");
}

BandImage& Granule::band(const std::string& band_id) {
  return const_cast<BandImage&>(std::as_const(*this).band(band_id));
}

std::vector<std::string> Granule::band_ids() const {
  std::vector<std::string> ids;
  ids.reserve(bands.size());
  for (const auto& b : bands) ids.push_back(b.band_id);
  return ids;
}

void Granule::validate() const {
  if (meta.bit_depth < 1 || meta.bit_depth > 16) {
    throw Error(ErrorCode::InvalidArgument, "bit_depth must be in [1,16]");
  }
  if (!(meta.resolution_m > 0.0)) throw Error(ErrorCode::InvalidArgument, "resolution_m must be > 0");
  if (!meta.geotransform.invertible()) throw Error(ErrorCode::InvalidArgument, "geotransform is singular");
  std::set<std::string> seen;
  const DN limit = meta.max_dn();
  for (const auto& b : bands) {
    if (!seen.insert(b.band_id).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate band id '" + b.band_id + "'");
    }
    if (b.width != width() || b.height != height() || b.size() != std::size_t(b.width) * b.height) {
      throw Error(ErrorCode::DimensionMismatch, "band '" + b.band_id + "' does not match the granule grid");
    }
    const auto hi = std::max_element(b.data.begin(), b.data.end());
    if (hi != b.data.end() && *hi > limit) {
      throw Error(ErrorCode::BitDepthViolation, "band '" + b.band_id + "' has DN " + std::to_string(*hi) +
                                                    " above 2^" + std::to_string(meta.bit_depth) + "-1");
    }
  }
}

BBox BBox::clamped(int width, int height) const {
  const double x0 = std::clamp(x, 0.0, double(width));
  const double y0 = std::clamp(y, 0.0, double(height));
  const double x1 = std::clamp(x + w, 0.0, double(width));
  const double y1 = std::clamp(y + h, 0.0, double(height));
  return {x0, y0, x1 - x0, y1 - y0};
}

PixelRect pixel_rect(const BBox& box, int width, int height) {
  PixelRect r;
  r.x0 = std::clamp(int(std::floor(box.x)), 0, width);
  r.y0 = std::clamp(int(std::floor(box.y)), 0, height);
  r.x1 = std::clamp(int(std::ceil(box.x + box.w)), 0, width);
  r.y1 = std::clamp(int(std::ceil(box.y + box.h)), 0, height);
  return r;
}

BandImage extract(const BandImage& band, const PixelRect& rect) {
  if (rect.x0 < 0 || rect.y0 < 0 || rect.x1 > band.width || rect.y1 > band.height || rect.empty()) {
    throw Error(ErrorCode::EmptyIntersection, "window outside band '" + band.band_id + "'");
  }
  BandImage out(band.band_id, rect.width(), rect.height());
  for (int y = 0; y < out.height; ++y) {
    const auto* src = &band.data[std::size_t(rect.y0 + y) * band.width + rect.x0];
    std::copy(src, src + out.width, &out.data[std::size_t(y) * out.width]);
  }
  return out;
}

// ---------------------------------------------------------------------------

MetaFile read_meta(const std::filesystem::path& meta_json) {
  std::ifstream in(meta_json);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + meta_json.string());
  MetaFile m;
  try {
    const json j = json::parse(in);
    m.id = j.at("id").get<std::string>();
    m.bands = j.at("bands").get<std::vector<std::string>>();
    m.meta.sensing_time = parse_utc(j.at("sensing_time").get<std::string>());
    m.meta.resolution_m = j.at("resolution_m").get<double>();
    m.meta.bit_depth = j.value("bit_depth", 12);
    const auto gt = j.at("geotransform").get<std::vector<double>>();
    if (gt.size() != 6) throw Error(ErrorCode::Format, "geotransform needs 6 coefficients");
    std::copy(gt.begin(), gt.end(), m.meta.geotransform.c.begin());
    m.meta.sensor = sensor_from_string(j.value("sensor", std::string("OTHER")));
    if (j.contains("detector_id") && !j["detector_id"].is_null()) {
      m.meta.detector_id = j["detector_id"].get<std::string>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, meta_json.string() + ": " + e.what());
  }
  if (!(m.meta.resolution_m > 0.0)) throw Error(ErrorCode::InvalidArgument, "resolution_m must be > 0");
  if (!m.meta.geotransform.invertible()) throw Error(ErrorCode::InvalidArgument, "geotransform is singular");
  if (m.meta.bit_depth < 1 || m.meta.bit_depth > 16) {
    throw Error(ErrorCode::InvalidArgument, "bit_depth must be in [1,16]");
  }
  return m;
}

Granule load_granule(const std::filesystem::path& dir) {
  MetaFile m = read_meta(dir / "meta.json");
  Granule g;
  g.id = std::move(m.id);
  g.meta = m.meta;
  for (const auto& band_id : m.bands) {
    const auto path = dir / (band_id + ".tif");
    if (!std::filesystem::exists(path)) {
      throw Error(ErrorCode::MissingBand, "declared band '" + band_id + "' has no file " + path.string());
    }
    g.bands.push_back(tiff::read(path, band_id));
  }
  g.validate();
  return g;
}

void write_granule(const Granule& g, const std::filesystem::path& dir, TiffCompression compression) {
  g.validate();
  std::filesystem::create_directories(dir);
  json j;
  j["id"] = g.id;
  j["bands"] = g.band_ids();
  j["sensing_time"] = format_utc(g.meta.sensing_time);
  j["resolution_m"] = g.meta.resolution_m;
  j["bit_depth"] = g.meta.bit_depth;
  j["geotransform"] = g.meta.geotransform.c;
  j["sensor"] = to_string(g.meta.sensor);
  j["detector_id"] = g.meta.detector_id ? json(*g.meta.detector_id) : json(nullptr);
  std::ofstream out(dir / "meta.json", std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + (dir / "meta.json").string());
  out << j.dump(2) << '\n';
  for (const auto& b : g.bands) tiff::write(b, dir / (b.band_id + ".tif"), compression);
}

// ---------------------------------------------------------------------------

Granule crop(const Granule& g, const BBox& box) {
  const PixelRect r = pixel_rect(box, g.width(), g.height());
  if (r.empty()) throw Error(ErrorCode::EmptyIntersection, "crop box does not intersect granule '" + g.id + "'");
  Granule out;
  out.id = g.id;
  out.meta = g.meta;
  out.meta.geotransform = g.meta.geotransform.translated(r.x0, r.y0);
  out.bands.reserve(g.bands.size());
  for (const auto& b : g.bands) out.bands.push_back(extract(b, r));
  return out;
}

DN percentile(const BandImage& band, double p) {
  if (band.data.empty()) throw Error(ErrorCode::InvalidArgument, "percentile of an empty band");
  std::vector<DN> sorted = band.data;
  const double clamped = std::clamp(p, 0.0, 100.0);
  const auto rank = std::size_t(std::llround(clamped / 100.0 * double(sorted.size() - 1)));
  std::nth_element(sorted.begin(), sorted.begin() + std::ptrdiff_t(rank), sorted.end());
  return sorted[rank];
}

std::vector<std::uint8_t> stretch_to_u8(const BandImage& band, double lo_pct, double hi_pct) {
  if (!(lo_pct >= 0.0 && lo_pct < hi_pct && hi_pct <= 100.0)) {
    throw Error(ErrorCode::InvalidArgument, "percentiles must satisfy 0 <= lo < hi <= 100");
  }
  std::vector<std::uint8_t> out(band.size(), 128);
  if (band.data.empty()) return out;
  const double lo = percentile(band, lo_pct);
  const double hi = percentile(band, hi_pct);
  if (hi <= lo) return out;
  const double scale = 255.0 / (hi - lo);
  for (std::size_t i = 0; i < band.size(); ++i) {
    const double v = std::clamp((double(band.data[i]) - lo) * scale, 0.0, 255.0);
    out[i] = std::uint8_t(std::lround(v));
  }
  return out;
}

std::vector<std::uint8_t> stretch_to_png(const BandImage& band, double lo_pct, double hi_pct) {
  return png::encode_gray8({band.width, band.height, stretch_to_u8(band, lo_pct, hi_pct)});
}

}  // namespace rawsea
