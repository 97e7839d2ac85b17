#pragma once

#include "aered/core/types.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace aered::cli {

/// Linear [0, 1] -> [0, 255] with clamping and rounding.
std::uint8_t to_gray8(double value);

/// Row r of an R x N abundance matrix as 8-bit grayscale pixels, row-major.
std::vector<std::uint8_t> abundance_map_pixels(const Matrix& A, Index r, Grid grid);

void write_png_gray8(const std::filesystem::path& path, Index height, Index width,
                     const std::vector<std::uint8_t>& pixels);

/// Reads back an 8-bit grayscale PNG (used by tests).
std::vector<std::uint8_t> read_png_gray8(const std::filesystem::path& path, Index& height, Index& width);

}  // namespace aered::cli
