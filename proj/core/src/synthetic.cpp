#include "rawsea/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "rawsea/geo.hpp"
#include "rawsea/metrics.hpp"
#include "rawsea/sensor.hpp"

namespace rawsea::synth {

namespace {

constexpr double kPi = std::numbers::pi;

struct Texture {
  double p1, p2, p3;
  double at(double x, double y) const {
    return 100.0 + 8.0 * std::sin(2 * kPi * x / 37.0 + p1) * std::cos(2 * kPi * y / 53.0 + p2) +
           4.0 * std::sin(2 * kPi * (x + y) / 23.0 + p3);
  }
};

bool overlaps_any(const BBox& b, const std::vector<Vessel>& vs) {
  const BBox grown = b.expanded(3.0);
  return std::any_of(vs.begin(), vs.end(), [&](const Vessel& v) { return eval::iou(grown, v.box) > 0.0; });
}

}  // namespace

Geotransform scene_geotransform(double lon, double lat, double resolution_m) {
  const auto origin = geo::lonlat_to_projected({lon, lat});
  const double east = resolution_m / std::cos(lat * kPi / 180.0);
  return Geotransform{{origin.x, east, 0.0, origin.y, 0.0, -resolution_m}};
}

Scene make_scene(std::uint64_t seed, const SceneConfig& cfg, const std::string& id) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  Scene s;
  s.granule.id = id;
  s.granule.meta.sensing_time = cfg.sensing_time;
  s.granule.meta.geotransform = scene_geotransform(cfg.origin_lon, cfg.origin_lat);
  s.granule.meta.resolution_m = 10.0;
  s.granule.meta.bit_depth = 12;

  const Texture tex{unit(rng) * 2 * kPi, unit(rng) * 2 * kPi, unit(rng) * 2 * kPi};
  const int count = uniform_int(cfg.min_vessels, cfg.max_vessels);
  for (int attempt = 0; attempt < 2000 && int(s.vessels.size()) < count; ++attempt) {
    const int w = uniform_int(6, 20), h = uniform_int(3, 8);
    const bool vertical = unit(rng) < 0.5;
    const int bw = vertical ? h : w, bh = vertical ? w : h;
    const BBox box{double(uniform_int(16, cfg.width - bw - 16)), double(uniform_int(16, cfg.height - bh - 16)), double(bw),
                   double(bh)};
    if (overlaps_any(box, s.vessels)) continue;
    Vessel v;
    v.box = box;
    v.dn = DN(uniform_int(500, 1200));
    s.vessels.push_back(v);
  }

  std::vector<double> band_gain;
  for (std::size_t b = 0; b < cfg.bands.size(); ++b) band_gain.push_back(0.85 + 0.3 * unit(rng));
  for (std::size_t b = 0; b < cfg.bands.size(); ++b) {
    const auto it = cfg.displacement.find(cfg.bands[b]);
    const coreg::Shift d = it == cfg.displacement.end() ? coreg::Shift{} : it->second;
    BandImage band(cfg.bands[b], cfg.width, cfg.height);
    for (int y = 0; y < cfg.height; ++y)
      for (int x = 0; x < cfg.width; ++x) band.at(x, y) = DN(std::lround(tex.at(x - d.dx, y - d.dy)));
    for (const auto& v : s.vessels) {
      const DN dn = DN(std::lround(v.dn * band_gain[b]));
      const PixelRect r = pixel_rect(v.box, cfg.width, cfg.height);
      for (int y = r.y0; y < r.y1; ++y)
        for (int x = r.x0; x < r.x1; ++x)
          if (band.contains(x + d.dx, y + d.dy)) band.at(x + d.dx, y + d.dy) = dn;
    }
    if (std::isfinite(cfg.snr)) {
      band = sensor::add_noise(band, sensor::NoiseSpec{cfg.snr, sensor::kDefaultDnRef, seed * 131 + b + 1},
                               s.granule.meta.bit_depth);
    }
    s.granule.bands.push_back(std::move(band));
  }

  const Geotransform& gt = s.granule.meta.geotransform;
  const geo::LocalFrame frame = geo::granule_frame(gt, cfg.width, cfg.height);
  std::int64_t next_mmsi = cfg.mmsi_base;
  const auto add_track = [&](double cx, double cy, std::int64_t mmsi, const std::string& status) {
    const geo::Vec2 c = frame.to_local(geo::pixel_to_lonlat(gt, cx, cy));
    const double heading = unit(rng) * 2 * kPi;
    const double speed = status == ais::kFishingStatus ? 1.0 + 2.0 * unit(rng) : 2.0 + 6.0 * unit(rng);
    const geo::Vec2 vel{speed * std::sin(heading), speed * std::cos(heading)};
    const double before = 2.0 + 28.0 * unit(rng), after = 2.0 + 28.0 * unit(rng);
    for (double dt : {-before - 60.0, -before, after}) {
      ais::AisRecord r;
      r.mmsi = mmsi;
      r.timestamp = cfg.sensing_time + std::chrono::milliseconds(std::llround(dt * 1000.0));
      const geo::LonLat ll = frame.to_lonlat({c.x + vel.x * dt, c.y + vel.y * dt});
      r.lat = ll.lat;
      r.lon = ll.lon;
      r.sog = speed * 1.943844;
      r.nav_status = status;
      r.ship_type = status == ais::kFishingStatus ? "Fishing" : "Cargo";
      r.length_m = 10.0 * std::max(1, uniform_int(6, 20));
      r.width_m = 10.0 * std::max(1, uniform_int(3, 8));
      s.ais.push_back(r);
    }
  };
  for (auto& v : s.vessels) {
    const bool dark = unit(rng) < cfg.dark_fraction;
    v.nav_status = unit(rng) < cfg.fishing_fraction ? ais::kFishingStatus : "Under way using engine";
    if (dark) continue;
    v.mmsi = next_mmsi++;
    add_track(v.box.cx(), v.box.cy(), *v.mmsi, v.nav_status);
  }
  for (int k = 0; k < cfg.extra_ais; ++k) {
    add_track(unit(rng) * cfg.width, unit(rng) * cfg.height, next_mmsi++, "Under way using engine");
  }
  // A vessel far outside the footprint, removed by geographic filtering.
  add_track(cfg.width * 20.0, cfg.height * 20.0, next_mmsi++, "Moored");
  std::sort(s.ais.begin(), s.ais.end(), [](const ais::AisRecord& a, const ais::AisRecord& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.mmsi < b.mmsi;
  });
  return s;
}

}  // namespace rawsea::synth
