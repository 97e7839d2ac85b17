#include "aered/synth/scene.hpp"

#include "aered/core/error.hpp"
#include "aered/core/fmx.hpp"
#include "aered/core/metrics.hpp"
#include "aered/core/mixing.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace aered::synth {
namespace {

enum Stream : std::uint64_t { kAbundanceStream = 1, kEndmemberStream = 2, kNoiseStream = 3 };

Index reflect_index(Index i, Index n) {
  const Index period = 2 * n;
  Index m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

Vector gaussian_kernel(double sigma) {
  const Index radius = std::max<Index>(1, static_cast<Index>(std::ceil(3.0 * sigma)));
  Vector k(2 * radius + 1);
  for (Index t = -radius; t <= radius; ++t) {
    k[t + radius] = std::exp(-0.5 * static_cast<double>(t * t) / (sigma * sigma));
  }
  return k / k.sum();
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_snr(const nlohmann::json& v) {
  if (v.is_null()) return std::numeric_limits<double>::infinity();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "none") return std::numeric_limits<double>::infinity();
    throw ConfigError("snr_db", "expected a number or \"inf\"");
  }
  if (!v.is_number()) throw ConfigError("snr_db", "expected a number or \"inf\"");
  return v.get<double>();
}

template <typename T>
T required(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(key, "missing required field \"" + std::string(key) + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(key, "wrong type");
  }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void SceneConfig::validate() const {
  if (height < 1) throw ConfigError("height", "must be >= 1");
  if (width < 1) throw ConfigError("width", "must be >= 1");
  if (endmembers < 1) throw ConfigError("R", "must be >= 1");
  if (bands < 1) throw ConfigError("B", "must be >= 1");
  if (!(correlation_length > 0.0) || !std::isfinite(correlation_length)) {
    throw ConfigError("correlation_length", "must be finite and > 0");
  }
  if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity()) {
    throw ConfigError("snr_db", "must be finite (or +inf to disable noise)");
  }
  if (std::holds_alternative<ProceduralSource>(endmember_source) && bands < 4) {
    throw ConfigError("B", "procedural endmembers need at least 4 bands");
  }
}

SceneConfig scene_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "scene config must be a JSON object");
  SceneConfig c;
  c.height = required<Index>(j, "height");
  c.width = required<Index>(j, "width");
  c.endmembers = required<Index>(j, "R");
  c.bands = required<Index>(j, "B");
  c.correlation_length = required<double>(j, "correlation_length");
  if (!j.contains("snr_db")) throw ConfigError("snr_db", "missing required field \"snr_db\"");
  c.snr_db = parse_snr(j.at("snr_db"));
  c.seed = required<std::uint64_t>(j, "seed");
  if (j.contains("endmember_source")) {
    const auto& src = j.at("endmember_source");
    if (src.is_string() && src.get<std::string>() == "procedural") {
      c.endmember_source = ProceduralSource{};
    } else if (src.is_object() && src.contains("csv")) {
      CsvSource csv;
      csv.path = required<std::string>(src, "csv");
      csv.selection_seed = src.value("selection_seed", std::uint64_t{0});
      c.endmember_source = csv;
    } else {
      throw ConfigError("endmember_source", "expected \"procedural\" or {\"csv\": path, \"selection_seed\": n}");
    }
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const SceneConfig& c) {
  nlohmann::json j;
  j["height"] = c.height;
  j["width"] = c.width;
  j["R"] = c.endmembers;
  j["B"] = c.bands;
  j["correlation_length"] = c.correlation_length;
  if (std::isinf(c.snr_db)) {
    j["snr_db"] = "inf";
  } else {
    j["snr_db"] = c.snr_db;
  }
  j["seed"] = c.seed;
  if (const auto* csv = std::get_if<CsvSource>(&c.endmember_source)) {
    j["endmember_source"] = {{"csv", csv->path.string()}, {"selection_seed", csv->selection_seed}};
  } else {
    j["endmember_source"] = "procedural";
  }
  return j;
}

void gaussian_blur(Eigen::Ref<Vector> channel, Grid grid, double sigma) {
  const Vector k = gaussian_kernel(sigma);
  const Index radius = (k.size() - 1) / 2;
  const Index H = grid.height, W = grid.width;
  Vector tmp(channel.size());
  // Horizontal pass.
  for (Index i = 0; i < H; ++i) {
    for (Index j = 0; j < W; ++j) {
      double acc = 0.0;
      for (Index t = -radius; t <= radius; ++t) acc += k[t + radius] * channel[grid.index(i, reflect_index(j + t, W))];
      tmp[grid.index(i, j)] = acc;
    }
  }
  // Vertical pass.
  for (Index i = 0; i < H; ++i) {
    for (Index j = 0; j < W; ++j) {
      double acc = 0.0;
      for (Index t = -radius; t <= radius; ++t) acc += k[t + radius] * tmp[grid.index(reflect_index(i + t, H), j)];
      channel[grid.index(i, j)] = acc;
    }
  }
}

AbundanceMatrix gaussian_field_abundances(Grid grid, Index endmembers, double correlation_length,
                                          std::uint64_t seed) {
  if (grid.height < 1 || grid.width < 1) throw ValueError("abundance field: grid must be at least 1x1");
  if (endmembers < 1) throw ValueError("abundance field: need at least one endmember");
  if (!(correlation_length > 0.0)) throw ValueError("abundance field: correlation_length must be > 0");

  const Index N = grid.pixels();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix logits(endmembers, N);
  Vector channel(N);
  for (Index r = 0; r < endmembers; ++r) {
    for (Index n = 0; n < N; ++n) channel[n] = normal(rng);
    gaussian_blur(channel, grid, correlation_length);
    const double mean = channel.mean();
    channel.array() -= mean;
    const double sd = std::sqrt(channel.squaredNorm() / static_cast<double>(N));
    if (sd > 0.0) channel /= sd;
    logits.row(r) = kSoftmaxTemperature * channel.transpose();
  }

  for (Index n = 0; n < N; ++n) {
    auto col = logits.col(n);
    col.array() = (col.array() - col.maxCoeff()).exp();
    col /= col.sum();
  }
  return AbundanceMatrix(std::move(logits));
}

EndmemberMatrix procedural_endmembers(Index bands, Index endmembers, std::uint64_t seed) {
  if (bands < 4) throw ValueError("procedural endmembers need at least 4 bands");
  if (endmembers < 1) throw ValueError("procedural endmembers need R >= 1");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> bump_count(3, 6);
  const double B = static_cast<double>(bands);

  for (int attempt = 0; attempt < kEndmemberAttempts; ++attempt) {
    Matrix S(bands, endmembers);
    for (Index r = 0; r < endmembers; ++r) {
      const int bumps = bump_count(rng);
      Vector s = Vector::Constant(bands, 0.05 + 0.25 * unit(rng));
      for (int b = 0; b < bumps; ++b) {
        const double center = (B - 1.0) * unit(rng);
        const double width = std::max(1.0, B * (0.04 + 0.16 * unit(rng)));
        const double amplitude = 0.2 + 0.8 * unit(rng);
        for (Index k = 0; k < bands; ++k) {
          const double d = (static_cast<double>(k) - center) / width;
          s[k] += amplitude * std::exp(-0.5 * d * d);
        }
      }
      const double peak = 0.4 + 0.6 * unit(rng);
      S.col(r) = s * (peak / s.maxCoeff());
    }

    bool separated = true;
    for (Index a = 0; a < endmembers && separated; ++a)
      for (Index b = a + 1; b < endmembers && separated; ++b)
        separated = spectral_angle(S.col(a), S.col(b)) >= kMinEndmemberAngle;
    if (separated) return EndmemberMatrix(std::move(S));
  }
  throw ValueError("procedural endmembers: could not reach pairwise spectral angle >= 0.15 rad after " +
                   std::to_string(kEndmemberAttempts) + " attempts; try a smaller R");
}

EndmemberMatrix load_endmembers_csv(const std::filesystem::path& path, Index endmembers,
                                    std::uint64_t selection_seed) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open endmember library " + path.string());

  std::string line;
  long line_no = 0;
  std::vector<std::string> names;
  while (names.empty() && std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    names = split_csv(line);
  }
  if (names.empty()) throw ParseError(path.string() + ": missing header row", line_no);
  const std::size_t columns = names.size();

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != columns) {
      throw ParseError(path.string() + ": expected " + std::to_string(columns) + " cells, found " +
                           std::to_string(cells.size()),
                       line_no);
    }
    std::vector<double> row(columns);
    for (std::size_t c = 0; c < columns; ++c) {
      const auto& cell = cells[c];
      const char* first = cell.data();
      const char* last = first + cell.size();
      if (!cell.empty() && *first == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, last, row[c]);
      if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(row[c])) {
        throw ParseError(path.string() + ": non-numeric cell '" + cell + "' in column " + std::to_string(c + 1),
                         line_no);
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path.string() + ": no band rows", line_no);
  if (static_cast<Index>(columns) < endmembers) {
    throw ParseError(path.string() + ": library has " + std::to_string(columns) + " spectra but " +
                     std::to_string(endmembers) + " were requested");
  }

  std::vector<Index> order(columns);
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(selection_seed);
  std::shuffle(order.begin(), order.end(), rng);

  const Index bands = static_cast<Index>(rows.size());
  Matrix S(bands, endmembers);
  for (Index r = 0; r < endmembers; ++r)
    for (Index b = 0; b < bands; ++b) S(b, r) = std::max(0.0, rows[b][order[r]]);
  return EndmemberMatrix(std::move(S));
}

NoisyImage add_noise(const HyperspectralImage& Y, double snr_db, std::uint64_t seed) {
  if (Y.data().size() == 0) throw ValueError("add_noise: empty image");
  if (std::isinf(snr_db) && snr_db > 0) return {Y, std::numeric_limits<double>::infinity()};

  const double signal_power = Y.data().squaredNorm() / static_cast<double>(Y.data().size());
  const double sigma = std::sqrt(signal_power / std::pow(10.0, snr_db / 10.0));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  Matrix E(Y.bands(), Y.pixels());
  for (Index n = 0; n < E.size(); ++n) E.data()[n] = normal(rng);

  const double realized = 10.0 * std::log10(Y.data().squaredNorm() / E.squaredNorm());
  return {HyperspectralImage(Y.data() + E, Y.grid()), realized};
}

SyntheticScene make_scene(const SceneConfig& config) {
  config.validate();
  AbundanceMatrix A = gaussian_field_abundances(config.grid(), config.endmembers, config.correlation_length,
                                                derive_seed(config.seed, kAbundanceStream));
  EndmemberMatrix S = std::visit(
      [&](const auto& src) -> EndmemberMatrix {
        using T = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<T, CsvSource>) {
          return load_endmembers_csv(src.path, config.endmembers, src.selection_seed);
        } else {
          return procedural_endmembers(config.bands, config.endmembers, derive_seed(config.seed, kEndmemberStream));
        }
      },
      config.endmember_source);
  if (S.bands() != config.bands) {
    throw ConfigError("B", "endmember library has " + std::to_string(S.bands()) + " bands");
  }

  HyperspectralImage clean = lmm_mix(S, A, config.grid());
  NoisyImage noisy = add_noise(clean, config.snr_db, derive_seed(config.seed, kNoiseStream));
  return SyntheticScene{std::move(clean), std::move(noisy.image), std::move(A), std::move(S), config,
                        noisy.realized_snr_db};
}

void write_scene(const SyntheticScene& scene, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json meta;
  meta["config"] = to_json(scene.config);
  if (std::isinf(scene.realized_snr_db)) {
    meta["realized_snr_db"] = "inf";
  } else {
    meta["realized_snr_db"] = scene.realized_snr_db;
  }
  meta["noise_model"] = "iid gaussian, variance = mean(Y_clean^2) / 10^(snr_db/10)";
  meta["pixel_order"] = "row-major: column index = row * width + col";
  meta["height"] = scene.clean.height();
  meta["width"] = scene.clean.width();
  {
    std::ofstream out(dir / "scene.json", std::ios::trunc);
    out << meta.dump(2) << '\n';
    if (!out) throw Error("cannot write " + (dir / "scene.json").string());
  }
  fmx::write(dir / "Y_clean.fmx", scene.clean.data());
  fmx::write(dir / "Y_noisy.fmx", scene.noisy.data());
  fmx::write(dir / "A_true.fmx", scene.abundances.data());
  fmx::write(dir / "S_true.fmx", scene.endmembers.data());
}

LoadedScene read_scene(const std::filesystem::path& dir) {
  LoadedScene out;
  const auto meta_path = dir / "scene.json";
  std::ifstream in(meta_path);
  if (!in) throw Error("scene directory " + dir.string() + " has no scene.json");
  try {
    in >> out.metadata;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(meta_path.string() + ": " + e.what());
  }
  if (!out.metadata.contains("height") || !out.metadata.contains("width")) {
    throw ParseError(meta_path.string() + ": needs height and width");
  }
  const Grid grid{out.metadata["height"].get<Index>(), out.metadata["width"].get<Index>()};
  out.noisy = HyperspectralImage(fmx::read(dir / "Y_noisy.fmx"), grid);
  if (std::filesystem::exists(dir / "Y_clean.fmx")) out.clean = fmx::read(dir / "Y_clean.fmx");
  if (std::filesystem::exists(dir / "A_true.fmx")) out.abundances = AbundanceMatrix(fmx::read(dir / "A_true.fmx"));
  if (std::filesystem::exists(dir / "S_true.fmx")) out.endmembers = EndmemberMatrix(fmx::read(dir / "S_true.fmx"));
  return out;
}

}  // namespace aered::synth
