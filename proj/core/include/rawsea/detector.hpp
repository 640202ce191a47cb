#pragma once

#include <string>
#include <vector>

#include "rawsea/raster.hpp"

namespace rawsea::detect {

struct Detection {
  BBox box;
  double score = 0.0;  ///< contrast over local background, in [0,1]
  std::string band_id;
};

struct DetectConfig {
  double min_area = 4.0;
  double max_area = 10000.0;
  int tile = 512;
  int overlap = 32;
  /// The consensus is recomputed on its own surviving pixels while they
  /// cover more than this fraction of the tile. 1.0 gives a single pass.
  double max_fg_fraction = 0.05;
  double min_score = 0.25;
  double merge_iou = 0.5;
  int background_ring = 4;

  void validate() const;
};

/// Tile-wise threshold-consensus detector. Components that touch a tile edge
/// lying inside the image are left to the neighbouring tile; duplicates from
/// overlapping tiles are merged when IoU > merge_iou, keeping the higher
/// score.
std::vector<Detection> detect(const BandImage& band, const DetectConfig& cfg = {});

/// The hierarchical pass stops before discarding pixels whose mean is this
/// many background standard deviations above the background mean.
inline constexpr double kTargetSeparation = 5.0;

/// Foreground mask of one tile after hierarchical consensus; empty vector
/// for constant tiles.
std::vector<std::uint8_t> tile_foreground(const BandImage& tile, double max_fg_fraction);

/// Tile origins along one axis covering [0, extent).
std::vector<int> tile_starts(int extent, int tile, int overlap);

}  // namespace rawsea::detect
