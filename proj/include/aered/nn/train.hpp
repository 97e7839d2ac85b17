#pragma once

#include "aered/core/error.hpp"
#include "aered/nn/adam.hpp"

#include <cstdint>
#include <vector>

namespace aered::nn {

struct TrainOptions {
  long epochs = 250;
  LearningRates lr;
  /// Bypass mode: when set, the encoder output is replaced by this matrix and
  /// only the decoder is trained.
  const Matrix* fixed_abundances = nullptr;
};

struct TrainReport {
  std::vector<double> losses;  // total loss evaluated before each step
  LossParts final_loss;        // loss with the returned parameters
  Matrix encoded;              // E(Y) with the returned parameters
};

/// Raised when the training loss stops being finite.
class TrainingDivergence : public Error {
 public:
  TrainingDivergence(long epoch, const std::string& what)
      : Error("training diverged at epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}
  long epoch() const noexcept { return epoch_; }

 private:
  long epoch_;
};

/// Full-batch Adam on ae_loss for `options.epochs` steps. `params` and `adam`
/// are updated in place so training can resume across ADMM iterations.
TrainReport train_ae(AeParams& params, AdamState& adam, const EncoderSpec& spec, const EncoderInput& input,
                     const Matrix& A, const Matrix& G, double mu, const TrainOptions& options);

/// He-uniform encoder kernels with zero biases; decoder columns are R pixels of
/// Y picked by the farthest-point heuristic in select_extreme_pixels.
AeParams init_params(const EncoderSpec& spec, const HyperspectralImage& Y, std::uint64_t seed);

/// Seeded farthest-point pixel selection. Works in the span of the top-R left
/// singular vectors of Y: starts from the pixel farthest from a random pixel,
/// then repeatedly adds the pixel farthest from the affine hull of the chosen
/// ones. Throws ValueError when fewer than R distinct pixels exist.
std::vector<Index> select_extreme_pixels(const Matrix& Y, Index count, std::uint64_t seed);

}  // namespace aered::nn
