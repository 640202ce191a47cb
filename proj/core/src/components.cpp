#include "rawsea/components.hpp"

#include "rawsea/error.hpp"

namespace rawsea {

std::vector<Component> connected_components(std::span<const std::uint8_t> mask, int width, int height,
                                            std::vector<int>* labels) {
  if (mask.size() != std::size_t(width) * std::size_t(height)) {
    throw Error(ErrorCode::SizeMismatch, "mask size does not match width*height");
  }
  std::vector<int> local;
  std::vector<int>& label = labels ? *labels : local;
  label.assign(mask.size(), 0);
  std::vector<Component> out;
  std::vector<std::size_t> stack;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t start = std::size_t(y) * width + x;
      if (!mask[start] || label[start]) continue;
      const int id = int(out.size()) + 1;
      Component c;
      c.first_x = x;
      c.first_y = y;
      c.bounds = {x, y, x + 1, y + 1};
      label[start] = id;
      stack.push_back(start);
      while (!stack.empty()) {
        const std::size_t p = stack.back();
        stack.pop_back();
        const int px = int(p % width);
        const int py = int(p / width);
        ++c.pixels;
        c.bounds.x0 = std::min(c.bounds.x0, px);
        c.bounds.y0 = std::min(c.bounds.y0, py);
        c.bounds.x1 = std::max(c.bounds.x1, px + 1);
        c.bounds.y1 = std::max(c.bounds.y1, py + 1);
        for (int dy = -1; dy <= 1; ++dy) {
          const int ny = py + dy;
          if (ny < 0 || ny >= height) continue;
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = px + dx;
            if (nx < 0 || nx >= width) continue;
            const std::size_t q = std::size_t(ny) * width + nx;
            if (mask[q] && !label[q]) {
              label[q] = id;
              stack.push_back(q);
            }
          }
        }
      }
      out.push_back(c);
    }
  }
  return out;
}

const Component* largest_component(const std::vector<Component>& components) {
  const Component* best = nullptr;
  for (const auto& c : components)
    if (!best || c.pixels > best->pixels) best = &c;
  return best;
}

}  // namespace rawsea
