#pragma once

#include <cstdint>
#include <vector>

namespace rawsea::png {

struct Gray8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

std::vector<std::uint8_t> encode_gray8(const Gray8& image);
Gray8 decode_gray8(const std::vector<std::uint8_t>& bytes);

}  // namespace rawsea::png
