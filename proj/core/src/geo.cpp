#include "rawsea/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rawsea::geo {

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;

double wrap_lon(double lon) {
  double d = std::fmod(lon + 180.0, 360.0);
  if (d < 0) d += 360.0;
  return d - 180.0;
}

double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const Vec2 ap = p - a;
  const double len2 = ab.x * ab.x + ab.y * ab.y;
  const double t = len2 > 0.0 ? std::clamp((ap.x * ab.x + ap.y * ab.y) / len2, 0.0, 1.0) : 0.0;
  return distance(p, {a.x + t * ab.x, a.y + t * ab.y});
}

double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
}  // namespace

double norm(Vec2 v) { return std::hypot(v.x, v.y); }
double distance(Vec2 a, Vec2 b) { return norm(a - b); }

LonLat projected_to_lonlat(Geotransform::Point p) {
  return {p.x / kEarthRadiusM / kDeg, p.y / kEarthRadiusM / kDeg};
}

Geotransform::Point lonlat_to_projected(LonLat ll) {
  return {ll.lon * kDeg * kEarthRadiusM, ll.lat * kDeg * kEarthRadiusM};
}

LonLat pixel_to_lonlat(const Geotransform& gt, double col, double row) {
  return projected_to_lonlat(gt.apply(col, row));
}

LocalFrame::LocalFrame(LonLat origin) : origin_(origin), cos_lat_(std::cos(origin.lat * kDeg)) {}

Vec2 LocalFrame::to_local(LonLat ll) const {
  return {kEarthRadiusM * wrap_lon(ll.lon - origin_.lon) * kDeg * cos_lat_,
          kEarthRadiusM * (ll.lat - origin_.lat) * kDeg};
}

LonLat LocalFrame::to_lonlat(Vec2 v) const {
  return {wrap_lon(origin_.lon + v.x / (kEarthRadiusM * cos_lat_) / kDeg), origin_.lat + v.y / kEarthRadiusM / kDeg};
}

LocalFrame granule_frame(const Geotransform& gt, int width, int height) {
  return LocalFrame(pixel_to_lonlat(gt, 0.5 * width, 0.5 * height));
}

Footprint::Footprint(const Geotransform& gt, int width, int height) : frame_(granule_frame(gt, width, height)) {
  const double w = width, h = height;
  const std::array<std::array<double, 2>, 4> px{{{0, 0}, {w, 0}, {w, h}, {0, h}}};
  for (int i = 0; i < 4; ++i) corners_[i] = frame_.to_local(pixel_to_lonlat(gt, px[i][0], px[i][1]));
}

bool Footprint::contains(LonLat ll, double radius_m) const { return contains(frame_.to_local(ll), radius_m); }

bool Footprint::contains(Vec2 p, double radius_m) const {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) return false;
  int pos = 0, neg = 0;
  for (int i = 0; i < 4; ++i) {
    const double c = cross(corners_[(i + 1) % 4] - corners_[i], p - corners_[i]);
    pos += c > 0.0;
    neg += c < 0.0;
  }
  if (pos == 0 || neg == 0) return true;
  for (int i = 0; i < 4; ++i) {
    if (segment_distance(p, corners_[i], corners_[(i + 1) % 4]) <= radius_m) return true;
  }
  return false;
}

}  // namespace rawsea::geo
