#include "rawsea/labeler.hpp"

#include "rawsea/components.hpp"
#include "rawsea/error.hpp"

namespace rawsea::label {

BBox fit_bbox(const BBox& coarse, const BandImage& band, int margin) {
  if (margin < 0) throw Error(ErrorCode::InvalidArgument, "margin must be >= 0");
  const PixelRect window = pixel_rect(coarse.expanded(margin), band.width, band.height);
  if (window.empty()) return coarse;
  const BandImage patch = extract(band, window);
  const ConsensusMask c = consensus_of(patch);
  const auto components = connected_components(c.mask, c.width, c.height);
  const Component* best = largest_component(components);
  if (!best) return coarse;
  return {double(window.x0 + best->bounds.x0), double(window.y0 + best->bounds.y0), double(best->bounds.width()),
          double(best->bounds.height())};
}

std::map<std::string, std::vector<BBox>> refine_annotations(const Granule& g, const std::vector<BBox>& coarse_boxes,
                                                            int margin) {
  std::map<std::string, std::vector<BBox>> out;
  for (const auto& band : g.bands) {
    auto& boxes = out[band.band_id];
    boxes.reserve(coarse_boxes.size());
    for (const auto& box : coarse_boxes) boxes.push_back(fit_bbox(box, band, margin));
  }
  return out;
}

}  // namespace rawsea::label
