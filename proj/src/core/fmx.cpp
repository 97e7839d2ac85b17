#include "aered/core/fmx.hpp"

#include "aered/core/error.hpp"

#include <json.hpp>

#include <bit>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace aered::fmx {

static_assert(std::endian::native == std::endian::little, "fmx I/O assumes a little-endian host");

void write(std::ostream& out, const Matrix& m) {
  out << R"({"rows":)" << m.rows() << R"(,"cols":)" << m.cols() << R"(,"order":"col-major","dtype":"f64"})"
      << '\n';
  out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (!out) throw Error("fmx: write failed");
}

void write(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("fmx: cannot open " + path.string() + " for writing");
  write(out, m);
}

Matrix read(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw ParseError("fmx: missing header line", 1);
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("fmx: malformed header: ") + e.what(), 1);
  }
  if (!h.contains("rows") || !h.contains("cols") || !h["rows"].is_number_integer() ||
      !h["cols"].is_number_integer()) {
    throw ParseError("fmx: header needs integer rows and cols", 1);
  }
  if (h.value("order", "") != "col-major" || h.value("dtype", "") != "f64") {
    throw ParseError("fmx: only col-major f64 payloads are supported", 1);
  }
  const auto rows = h["rows"].get<long long>();
  const auto cols = h["cols"].get<long long>();
  if (rows < 0 || cols < 0) throw ParseError("fmx: negative dimensions", 1);
  Matrix m(rows, cols);
  in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(m.size() * sizeof(double))) {
    throw ParseError("fmx: payload shorter than rows*cols values");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError("fmx: trailing bytes after payload");
  }
  return m;
}

Matrix read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("fmx: cannot open " + path.string());
  try {
    return read(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace aered::fmx
