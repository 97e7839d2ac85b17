#pragma once

#include "aered/core/error.hpp"
#include "aered/core/types.hpp"
#include "aered/denoise/denoisers.hpp"
#include "aered/nn/adam.hpp"
#include "aered/nn/network.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace aered::admm {

struct AdmmConfig {
  double lambda = 0.1;  // RED weight
  double mu = 0.1;      // ADMM penalty; may be 0 only when lambda is 0
  long outer_iterations = 15;
  long inner_iterations = 1;
  long epochs = 250;
  nn::LearningRates lr{1e-3, 1e-4};
  std::uint64_t seed = 0;
  Index endmembers = 0;
  std::vector<Index> encoder_widths;  // empty: {64, 32, 16, 2R}
  denoise::DenoiserSpec denoiser;
  int threads = 1;
  /// Denoise the previous iterate while the autoencoder trains (J = 1 only).
  bool overlap_denoiser = false;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// lambda = mu = 0.5 at <= 10 dB, 0.1 at 20 dB, 0.01 at >= 30 dB.
  static double penalty_for_snr(double snr_db);
};

struct HistoryEntry {
  long k = 0;
  double ae_loss = 0.0;          // training objective after the Theta-update
  double reconstruction = 0.0;   // ||Y - S E||^2 after the Theta-update
  double red_value = 0.0;        // RED functional at the new auxiliary A
  double primal_residual = 0.0;  // ||A - E(Y)||_F
  double simplex_drift = 0.0;    // max |1'a - 1| or negativity of auxiliary A
  std::optional<double> rmse, msad, msid, psnr;
};

struct AdmmState {
  Matrix A;  // auxiliary abundances
  Matrix G;  // scaled dual
  nn::AeParams params;
  nn::AdamState adam;
  long k = 0;
  std::vector<HistoryEntry> history;
};

/// Optional references used to score each iteration.
struct GroundTruth {
  const AbundanceMatrix* abundances = nullptr;
  const EndmemberMatrix* endmembers = nullptr;
  const Matrix* clean = nullptr;  // PSNR reference
};

struct AdmmResult {
  AbundanceMatrix abundances;  // encoder output, simplex-feasible
  EndmemberMatrix endmembers;  // decoder weights
  nn::EncoderSpec spec;
  AdmmState state;
};

/// Raised on divergence; carries the history recorded before the failure.
class AdmmFailure : public Error {
 public:
  AdmmFailure(long iteration, const std::string& what, std::vector<HistoryEntry> history)
      : Error("AE-RED failed at outer iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration),
        history_(std::move(history)) {}
  long iteration() const noexcept { return iteration_; }
  const std::vector<HistoryEntry>& history() const noexcept { return history_; }

 private:
  long iteration_;
  std::vector<HistoryEntry> history_;
};

/// J fixed-point sweeps A <- (lambda C(A) + mu (E + G)) / (lambda + mu), starting
/// at `A`. With lambda = 0 returns E + G without calling the denoiser.
/// `first_denoised`, when given, is used as C(A) for the first sweep.
Matrix update_abundance(const Matrix& A, const Matrix& encoded, const Matrix& G, double lambda, double mu,
                        long inner_iterations, Grid grid, const denoise::DenoiserSpec& denoiser, int threads = 1,
                        const Matrix* first_denoised = nullptr);

/// G - A + E.
Matrix update_dual(const Matrix& G, const Matrix& A, const Matrix& encoded);

/// Alternates autoencoder training, the RED abundance update and dual ascent
/// for config.outer_iterations steps. `init` overrides init_params.
AdmmResult run_ae_red(const HyperspectralImage& Y, const AdmmConfig& config, const nn::AeParams* init = nullptr,
                      const GroundTruth& truth = {});

}  // namespace aered::admm
