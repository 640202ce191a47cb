#include "rawsea/tiff.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

#include "rawsea/error.hpp"

namespace rawsea::tiff {

namespace {

enum Tag : std::uint16_t {
  kImageWidth = 256,
  kImageLength = 257,
  kBitsPerSample = 258,
  kCompression = 259,
  kPhotometric = 262,
  kStripOffsets = 273,
  kSamplesPerPixel = 277,
  kRowsPerStrip = 278,
  kStripByteCounts = 279,
  kPlanarConfig = 284,
  kPredictor = 317,
  kTileWidth = 322,
  kSampleFormat = 339,
};

constexpr std::uint16_t kShort = 3;
constexpr std::uint16_t kLong = 4;

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorCode::Format, "TIFF: " + what); }

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& b) : bytes_(b) {
    if (b.size() < 8) fail("file too short");
    if (b[0] == 'I' && b[1] == 'I') {
      little_ = true;
    } else if (b[0] == 'M' && b[1] == 'M') {
      little_ = false;
    } else {
      fail("bad byte-order mark");
    }
    if (u16(2) != 42) fail("not a classic TIFF (BigTIFF unsupported)");
  }

  std::uint16_t u16(std::size_t off) const {
    check(off, 2);
    return little_ ? std::uint16_t(bytes_[off] | bytes_[off + 1] << 8)
                   : std::uint16_t(bytes_[off] << 8 | bytes_[off + 1]);
  }
  std::uint32_t u32(std::size_t off) const {
    check(off, 4);
    const auto* p = &bytes_[off];
    return little_ ? std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
                         std::uint32_t(p[3]) << 24
                   : std::uint32_t(p[3]) | std::uint32_t(p[2]) << 8 | std::uint32_t(p[1]) << 16 |
                         std::uint32_t(p[0]) << 24;
  }
  void check(std::size_t off, std::size_t n) const {
    if (off + n > bytes_.size() || off + n < off) fail("offset out of range");
  }
  bool little() const { return little_; }

  /// Values of one IFD entry as unsigned integers (SHORT or LONG only).
  std::vector<std::uint32_t> values(std::size_t entry) const {
    const std::uint16_t type = u16(entry + 2);
    const std::uint32_t count = u32(entry + 4);
    if (type != kShort && type != kLong) return {};
    const std::size_t width = type == kShort ? 2 : 4;
    if (count > bytes_.size()) fail("implausible value count");
    std::size_t off = entry + 8;
    if (count * width > 4) off = u32(entry + 8);
    std::vector<std::uint32_t> out(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      out[i] = type == kShort ? u16(off + i * 2) : u32(off + i * 4);
    }
    return out;
  }

 private:
  const std::vector<std::uint8_t>& bytes_;
  bool little_ = true;
};

std::vector<std::uint8_t> inflate_all(const std::uint8_t* data, std::size_t size, std::size_t expected) {
  std::vector<std::uint8_t> out(expected);
  z_stream zs{};
  if (inflateInit(&zs) != Z_OK) fail("zlib init");
  zs.next_in = const_cast<Bytef*>(data);
  zs.avail_in = static_cast<uInt>(size);
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  const std::size_t produced = out.size() - zs.avail_out;
  inflateEnd(&zs);
  if ((rc != Z_STREAM_END && rc != Z_BUF_ERROR) || produced != expected) fail("corrupt deflate strip");
  return out;
}

std::vector<std::uint8_t> deflate_all(const std::uint8_t* data, std::size_t size) {
  uLongf bound = compressBound(static_cast<uLong>(size));
  std::vector<std::uint8_t> out(bound);
  if (compress2(out.data(), &bound, data, static_cast<uLong>(size), 6) != Z_OK) fail("zlib compress");
  out.resize(bound);
  return out;
}

void put16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(std::uint8_t(v & 0xff));
  b.push_back(std::uint8_t(v >> 8));
}
void put32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(std::uint8_t(v >> (8 * i)));
}

}  // namespace

BandImage decode(const std::vector<std::uint8_t>& bytes, const std::string& band_id) {
  const Reader r(bytes);
  const std::size_t ifd = r.u32(4);
  const std::uint16_t n = r.u16(ifd);
  std::map<std::uint16_t, std::vector<std::uint32_t>> tags;
  for (std::uint16_t i = 0; i < n; ++i) {
    const std::size_t entry = ifd + 2 + std::size_t(i) * 12;
    tags[r.u16(entry)] = r.values(entry);
  }
  auto scalar = [&](Tag t, std::uint32_t fallback, bool required) -> std::uint32_t {
    auto it = tags.find(t);
    if (it == tags.end() || it->second.empty()) {
      if (required) fail("missing tag " + std::to_string(t));
      return fallback;
    }
    return it->second.front();
  };
  if (tags.count(kTileWidth)) fail("tiled layout unsupported");
  const std::uint32_t width = scalar(kImageWidth, 0, true);
  const std::uint32_t height = scalar(kImageLength, 0, true);
  if (scalar(kBitsPerSample, 1, true) != 16) fail("only 16-bit samples supported");
  if (scalar(kSamplesPerPixel, 1, false) != 1) fail("only single-band images supported");
  if (scalar(kSampleFormat, 1, false) != 1) fail("only unsigned integer samples supported");
  const std::uint32_t compression = scalar(kCompression, 1, false);
  if (compression != 1 && compression != 8 && compression != 32946) {
    fail("unsupported compression " + std::to_string(compression));
  }
  const std::uint32_t predictor = scalar(kPredictor, 1, false);
  if (predictor != 1 && predictor != 2) fail("unsupported predictor");
  if (width == 0 || height == 0 || std::uint64_t(width) * height > (1ull << 31)) fail("bad dimensions");
  const std::uint32_t rows_per_strip = std::min(scalar(kRowsPerStrip, height, false), height);
  const auto& offsets = tags[kStripOffsets];
  const auto& counts = tags[kStripByteCounts];
  const std::size_t strips = (height + rows_per_strip - 1) / rows_per_strip;
  if (offsets.size() != strips || counts.size() != strips) fail("strip table mismatch");

  BandImage band(band_id, int(width), int(height));
  const std::size_t row_bytes = std::size_t(width) * 2;
  std::size_t row = 0;
  for (std::size_t s = 0; s < strips; ++s) {
    const std::size_t rows = std::min<std::size_t>(rows_per_strip, height - row);
    const std::size_t expected = rows * row_bytes;
    r.check(offsets[s], counts[s]);
    std::vector<std::uint8_t> raw;
    if (compression == 1) {
      if (counts[s] < expected) fail("short strip");
      raw.assign(bytes.begin() + offsets[s], bytes.begin() + offsets[s] + expected);
    } else {
      raw = inflate_all(bytes.data() + offsets[s], counts[s], expected);
    }
    for (std::size_t y = 0; y < rows; ++y) {
      DN* dst = &band.data[(row + y) * width];
      const std::uint8_t* src = &raw[y * row_bytes];
      for (std::size_t x = 0; x < width; ++x) {
        dst[x] = r.little() ? DN(src[2 * x] | src[2 * x + 1] << 8) : DN(src[2 * x] << 8 | src[2 * x + 1]);
      }
      if (predictor == 2) {
        for (std::size_t x = 1; x < width; ++x) dst[x] = DN(dst[x] + dst[x - 1]);
      }
    }
    row += rows;
  }
  return band;
}

std::vector<std::uint8_t> encode(const BandImage& band, TiffCompression compression) {
  if (band.width <= 0 || band.height <= 0 || band.size() != std::size_t(band.width) * band.height) {
    throw Error(ErrorCode::InvalidArgument, "cannot encode band '" + band.band_id + "' with bad shape");
  }
  std::vector<std::uint8_t> pixels;
  pixels.reserve(band.size() * 2);
  for (DN v : band.data) put16(pixels, v);
  const bool deflate = compression == TiffCompression::Deflate;
  if (deflate) pixels = deflate_all(pixels.data(), pixels.size());

  struct Entry {
    std::uint16_t tag, type;
    std::uint32_t value;
  };
  const std::vector<Entry> entries = {
      {kImageWidth, kLong, std::uint32_t(band.width)},
      {kImageLength, kLong, std::uint32_t(band.height)},
      {kBitsPerSample, kShort, 16},
      {kCompression, kShort, deflate ? 8u : 1u},
      {kPhotometric, kShort, 1},
      {kStripOffsets, kLong, 0},  // patched below
      {kSamplesPerPixel, kShort, 1},
      {kRowsPerStrip, kLong, std::uint32_t(band.height)},
      {kStripByteCounts, kLong, std::uint32_t(pixels.size())},
      {kPlanarConfig, kShort, 1},
      {kSampleFormat, kShort, 1},
  };
  const std::uint32_t ifd_offset = 8;
  const std::uint32_t data_offset = ifd_offset + 2 + std::uint32_t(entries.size()) * 12 + 4;

  std::vector<std::uint8_t> out{'I', 'I'};
  put16(out, 42);
  put32(out, ifd_offset);
  put16(out, std::uint16_t(entries.size()));
  for (const auto& e : entries) {
    put16(out, e.tag);
    put16(out, e.type);
    put32(out, 1);
    const std::uint32_t v = e.tag == kStripOffsets ? data_offset : e.value;
    if (e.type == kShort) {
      put16(out, std::uint16_t(v));
      put16(out, 0);
    } else {
      put32(out, v);
    }
  }
  put32(out, 0);
  out.insert(out.end(), pixels.begin(), pixels.end());
  return out;
}

BandImage read(const std::filesystem::path& path, const std::string& band_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode(bytes, band_id);
  } catch (const Error& e) {
    throw Error(e.code(), std::string(e.what()) + " (" + path.string() + ")");
  }
}

void write(const BandImage& band, const std::filesystem::path& path, TiffCompression compression) {
  const auto bytes = encode(band, compression);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

}  // namespace rawsea::tiff
