#pragma once

#include "aered/admm/admm.hpp"
#include "aered/core/types.hpp"

namespace aered::baselines {

struct FclsOptions {
  long iterations = 500;
  int power_iterations = 50;
  /// Divergence: this many consecutive loss increases.
  int max_increases = 10;
};

struct FclsResult {
  AbundanceMatrix abundances;
  std::vector<double> losses;  // 0.5 ||Y - S A||^2 after each step
  double step = 0.0;
};

/// Largest eigenvalue of S'S by power iteration from the all-ones vector.
double gram_spectral_norm(const Matrix& S, int iterations);

/// Fully constrained least squares with known endmembers: projected gradient on
/// 0.5 ||Y - S A||^2 with step 1/L (L = largest eigenvalue of S'S), projecting
/// every column onto the simplex after each step. Starts from uniform abundances.
FclsResult fcls(const HyperspectralImage& Y, const EndmemberMatrix& S, const FclsOptions& options = {});

/// Plain autoencoder: the degenerate ADMM run with lambda = 0, mu = 0, K = 1 and
/// K * epochs training epochs (same training budget as the full run).
admm::AdmmResult plain_ae(const HyperspectralImage& Y, const admm::AdmmConfig& config,
                          const nn::AeParams* init = nullptr, const admm::GroundTruth& truth = {});

/// The configuration plain_ae actually runs.
admm::AdmmConfig plain_ae_config(const admm::AdmmConfig& config);

}  // namespace aered::baselines
