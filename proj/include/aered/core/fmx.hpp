#pragma once

#include "aered/core/types.hpp"

#include <filesystem>
#include <iosfwd>

namespace aered::fmx {

// One JSON header line {"rows":R,"cols":C,"order":"col-major","dtype":"f64"}
// followed by rows*cols little-endian doubles in column-major order.

void write(std::ostream& out, const Matrix& m);
void write(const std::filesystem::path& path, const Matrix& m);

Matrix read(std::istream& in);
Matrix read(const std::filesystem::path& path);

}  // namespace aered::fmx
