#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rawsea/raster.hpp"

namespace rawsea {

struct Component {
  std::size_t pixels = 0;
  PixelRect bounds;
  int first_x = 0;  ///< first pixel in raster order
  int first_y = 0;
};

/// 8-connected components of a binary mask, ordered by their first pixel in
/// raster order. When `labels` is given it receives 1-based component ids
/// (0 = background).
std::vector<Component> connected_components(std::span<const std::uint8_t> mask, int width, int height,
                                            std::vector<int>* labels = nullptr);

/// Largest component; ties go to the earliest in raster order.
const Component* largest_component(const std::vector<Component>& components);

}  // namespace rawsea
