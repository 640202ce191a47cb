#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "rawsea/ais.hpp"
#include "rawsea/coregister.hpp"
#include "rawsea/raster.hpp"

namespace rawsea::synth {

struct SceneConfig {
  int width = 384;
  int height = 384;
  int min_vessels = 5;
  int max_vessels = 15;
  std::vector<std::string> bands{"B2", "B3", "B4", "B8"};
  /// Content displacement of each non-reference band: band(x+dx, y+dy) = ref(x, y).
  std::map<std::string, coreg::Shift> displacement;
  double snr = std::numeric_limits<double>::infinity();
  double fishing_fraction = 0.3;
  double dark_fraction = 0.0;  ///< vessels without AIS
  int extra_ais = 2;           ///< AIS-only vessels inside the scene
  double origin_lon = 11.0;
  double origin_lat = 56.0;
  UtcTime sensing_time = UtcTime{std::chrono::milliseconds(1656669600000)};  // 2022-07-01T10:00:00Z
  std::int64_t mmsi_base = 219000000;
};

struct Vessel {
  BBox box;  ///< reference-band pixels
  DN dn = 0;
  std::optional<std::int64_t> mmsi;
  std::string nav_status;
};

struct Scene {
  Granule granule;
  std::vector<Vessel> vessels;
  std::vector<ais::AisRecord> ais;
};

/// Textured sea around DN 100 with non-overlapping bright rectangles and
/// consistent AIS tracks. Deterministic in (seed, cfg, id).
Scene make_scene(std::uint64_t seed, const SceneConfig& cfg, const std::string& id);

/// Geotransform whose pixels are ~10 m on the ground at the origin.
Geotransform scene_geotransform(double lon, double lat, double resolution_m = 10.0);

}  // namespace rawsea::synth
