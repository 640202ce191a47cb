#pragma once

#include <filesystem>
#include <vector>

#include "rawsea/raster.hpp"

namespace rawsea::tiff {

/// Minimal baseline TIFF support for single-band 16-bit grayscale rasters:
/// strip layout, compression none or deflate (8 / 32946), predictor 1 or 2,
/// either byte order on read. Written files are little-endian, one strip.
BandImage read(const std::filesystem::path& path, const std::string& band_id);
void write(const BandImage& band, const std::filesystem::path& path,
           TiffCompression compression = TiffCompression::Deflate);

std::vector<std::uint8_t> encode(const BandImage& band, TiffCompression compression);
BandImage decode(const std::vector<std::uint8_t>& bytes, const std::string& band_id);

}  // namespace rawsea::tiff
