#include "aered/cli/png.hpp"

#include "aered/core/error.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

namespace aered::cli {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

std::uint8_t to_gray8(double value) {
  if (std::isnan(value)) return 0;
  return static_cast<std::uint8_t>(std::lround(std::clamp(value, 0.0, 1.0) * 255.0));
}

std::vector<std::uint8_t> abundance_map_pixels(const Matrix& A, Index r, Grid grid) {
  std::vector<std::uint8_t> px(static_cast<std::size_t>(grid.pixels()));
  for (Index n = 0; n < grid.pixels(); ++n) px[static_cast<std::size_t>(n)] = to_gray8(A(r, n));
  return px;
}

void write_png_gray8(const std::filesystem::path& path, Index height, Index width,
                     const std::vector<std::uint8_t>& pixels) {
  if (static_cast<Index>(pixels.size()) != height * width) throw DimensionError("png: pixel count mismatch");
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw Error("png: cannot open " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("png: cannot create write struct");
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, info ? &info : nullptr);
    throw Error("png: encoding failed for " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (Index i = 0; i < height; ++i) {
    png_write_row(png, pixels.data() + i * width);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

std::vector<std::uint8_t> read_png_gray8(const std::filesystem::path& path, Index& height, Index& width) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw Error("png: cannot open " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("png: cannot create read struct");
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    throw Error("png: decoding failed for " + path.string());
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY || png_get_bit_depth(png, info) != 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("png: expected 8-bit grayscale");
  }
  std::vector<std::uint8_t> px(static_cast<std::size_t>(height * width));
  for (Index i = 0; i < height; ++i) png_read_row(png, px.data() + i * width, nullptr);
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return px;
}

}  // namespace aered::cli
