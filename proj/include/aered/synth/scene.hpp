#pragma once

#include "aered/core/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <variant>

namespace aered::synth {

/// Softmax sharpness applied to unit-variance Gaussian fields: logits = tau * z.
inline constexpr double kSoftmaxTemperature = 1.5;
/// Minimum pairwise spectral angle for procedural endmembers (radians).
inline constexpr double kMinEndmemberAngle = 0.15;
inline constexpr int kEndmemberAttempts = 100;

struct ProceduralSource {};

struct CsvSource {
  std::filesystem::path path;
  std::uint64_t selection_seed = 0;
};

using EndmemberSource = std::variant<ProceduralSource, CsvSource>;

struct SceneConfig {
  Index height = 0;
  Index width = 0;
  Index endmembers = 0;  // R
  Index bands = 0;       // B
  double correlation_length = 5.0;
  double snr_db = std::numeric_limits<double>::infinity();  // +inf disables noise
  std::uint64_t seed = 0;
  EndmemberSource endmember_source = ProceduralSource{};

  Grid grid() const { return {height, width}; }
  /// Throws ConfigError naming the first bad field.
  void validate() const;
};

/// Parses flat JSON keys: height, width, R, B, correlation_length, snr_db
/// (number, or "inf"/null for noise-free), seed, endmember_source
/// ("procedural" or {"csv": path, "selection_seed": n}).
SceneConfig scene_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SceneConfig& config);

struct NoisyImage {
  HyperspectralImage image;
  double realized_snr_db = std::numeric_limits<double>::infinity();
};

struct SyntheticScene {
  HyperspectralImage clean;
  HyperspectralImage noisy;
  AbundanceMatrix abundances;
  EndmemberMatrix endmembers;
  SceneConfig config;
  double realized_snr_db = std::numeric_limits<double>::infinity();
};

/// Smooth random abundance maps: per-channel white noise blurred by an isotropic
/// Gaussian (std = correlation_length, reflect padding), standardized, then a
/// pixelwise softmax across channels.
AbundanceMatrix gaussian_field_abundances(Grid grid, Index endmembers, double correlation_length,
                                          std::uint64_t seed);

/// Blurs one row-major height x width channel in place with a Gaussian of the given std.
void gaussian_blur(Eigen::Ref<Vector> channel, Grid grid, double sigma);

/// Sums of 3-6 Gaussian bumps plus a positive offset, peak scaled into [0.4, 1].
/// Pairwise angles are at least kMinEndmemberAngle; throws ValueError after
/// kEndmemberAttempts failed draws.
EndmemberMatrix procedural_endmembers(Index bands, Index endmembers, std::uint64_t seed);

/// Reads a spectral library CSV (header of names, then one numeric row per band,
/// one spectrum per column) and draws `endmembers` distinct columns.
EndmemberMatrix load_endmembers_csv(const std::filesystem::path& path, Index endmembers,
                                    std::uint64_t selection_seed);

/// Adds iid Gaussian noise with variance mean(Y^2) / 10^(snr_db/10).
NoisyImage add_noise(const HyperspectralImage& Y, double snr_db, std::uint64_t seed);

SyntheticScene make_scene(const SceneConfig& config);

/// scene.json + Y_clean.fmx, Y_noisy.fmx, A_true.fmx, S_true.fmx.
void write_scene(const SyntheticScene& scene, const std::filesystem::path& dir);

/// A scene directory as found on disk. Only the noisy image is mandatory.
struct LoadedScene {
  HyperspectralImage noisy;
  std::optional<Matrix> clean;
  std::optional<AbundanceMatrix> abundances;
  std::optional<EndmemberMatrix> endmembers;
  nlohmann::json metadata;
};

LoadedScene read_scene(const std::filesystem::path& dir);

/// Deterministic sub-seed derivation (splitmix64 over seed and stream id).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace aered::synth
