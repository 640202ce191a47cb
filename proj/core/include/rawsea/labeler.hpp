#pragma once

#include <map>
#include <string>
#include <vector>

#include "rawsea/raster.hpp"
#include "rawsea/threshold.hpp"

namespace rawsea::label {

inline constexpr int kDefaultMargin = 8;

/// Refines a coarse box against one band: the four-method consensus is
/// computed inside the coarse box grown by `margin` (clamped to the band)
/// and the tight box around its largest 8-connected component is returned.
/// Falls back to `coarse` when the window is constant or the consensus is
/// empty.
BBox fit_bbox(const BBox& coarse, const BandImage& band, int margin = kDefaultMargin);

/// One refined box per coarse box for every band of the granule.
std::map<std::string, std::vector<BBox>> refine_annotations(const Granule& g, const std::vector<BBox>& coarse_boxes,
                                                            int margin = kDefaultMargin);

}  // namespace rawsea::label
