#pragma once

#include <array>

#include "rawsea/raster.hpp"

namespace rawsea::geo {

inline constexpr double kEarthRadiusM = 6371008.8;

struct LonLat {
  double lon = 0.0;
  double lat = 0.0;
};

/// Meters east (x) and north (y).
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
double norm(Vec2 v);
double distance(Vec2 a, Vec2 b);

/// Geotransform output is World Equidistant Cylindrical meters.
LonLat projected_to_lonlat(Geotransform::Point p);
Geotransform::Point lonlat_to_projected(LonLat ll);
LonLat pixel_to_lonlat(const Geotransform& gt, double col, double row);

/// Local equirectangular frame about an origin.
class LocalFrame {
 public:
  explicit LocalFrame(LonLat origin = {});
  Vec2 to_local(LonLat ll) const;
  LonLat to_lonlat(Vec2 v) const;
  LonLat origin() const { return origin_; }

 private:
  LonLat origin_;
  double cos_lat_;
};

/// Frame centred on the middle of a width x height grid.
LocalFrame granule_frame(const Geotransform& gt, int width, int height);

/// Image quadrilateral in its granule frame.
class Footprint {
 public:
  Footprint(const Geotransform& gt, int width, int height);

  const LocalFrame& frame() const { return frame_; }
  const std::array<Vec2, 4>& corners() const { return corners_; }
  /// True when the point lies inside the quadrilateral or within radius_m
  /// of its boundary.
  bool contains(LonLat ll, double radius_m = 0.0) const;
  bool contains(Vec2 local, double radius_m = 0.0) const;

 private:
  LocalFrame frame_;
  std::array<Vec2, 4> corners_;
};

}  // namespace rawsea::geo
