#include "rawsea/png.hpp"

#include <png.h>

#include <csetjmp>
#include <cstring>

#include "rawsea/error.hpp"

namespace rawsea::png {

namespace {

struct ReadCursor {
  const std::vector<std::uint8_t>* bytes;
  std::size_t pos;
};

void append_bytes(png_structp p, png_bytep data, png_size_t n) {
  auto* v = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
  v->insert(v->end(), data, data + n);
}

void read_bytes(png_structp p, png_bytep data, png_size_t n) {
  auto* c = static_cast<ReadCursor*>(png_get_io_ptr(p));
  if (c->pos + n > c->bytes->size()) png_error(p, "truncated stream");
  std::memcpy(data, c->bytes->data() + c->pos, n);
  c->pos += n;
}

// libpng reports errors through longjmp; nothing with a non-trivial
// destructor may be created between setjmp and the last libpng call.
bool write_rows(png_structp png, png_infop info, const Gray8& image, std::vector<std::uint8_t>* out) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_write_fn(png, out, append_bytes, nullptr);
  png_set_IHDR(png, info, png_uint_32(image.width), png_uint_32(image.height), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < image.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(&image.pixels[std::size_t(y) * image.width]));
  }
  png_write_end(png, nullptr);
  return true;
}

bool read_header(png_structp png, png_infop info, ReadCursor* cursor, int* width, int* height) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_read_fn(png, cursor, read_bytes);
  png_read_info(png, info);
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY || png_get_bit_depth(png, info) != 8) return false;
  *width = int(png_get_image_width(png, info));
  *height = int(png_get_image_height(png, info));
  return true;
}

bool read_rows(png_structp png, std::uint8_t* pixels, int width, int height) {
  if (setjmp(png_jmpbuf(png))) return false;
  for (int y = 0; y < height; ++y) png_read_row(png, pixels + std::size_t(y) * width, nullptr);
  return true;
}

}  // namespace

std::vector<std::uint8_t> encode_gray8(const Gray8& image) {
  if (image.width <= 0 || image.height <= 0 ||
      image.pixels.size() != std::size_t(image.width) * std::size_t(image.height)) {
    throw Error(ErrorCode::InvalidArgument, "PNG: bad image shape");
  }
  std::vector<std::uint8_t> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  const bool ok = info && write_rows(png, info, image, &out);
  png_destroy_write_struct(&png, &info);
  if (!ok) throw Error(ErrorCode::Format, "PNG: encoding failed");
  return out;
}

Gray8 decode_gray8(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error(ErrorCode::Format, "PNG: bad signature");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  ReadCursor cursor{&bytes, 0};
  Gray8 out;
  bool ok = info && read_header(png, info, &cursor, &out.width, &out.height);
  if (ok) {
    out.pixels.resize(std::size_t(out.width) * std::size_t(out.height));
    ok = read_rows(png, out.pixels.data(), out.width, out.height);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (!ok) throw Error(ErrorCode::Format, "PNG: not a readable 8-bit grayscale image");
  return out;
}

}  // namespace rawsea::png
