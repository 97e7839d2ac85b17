#include "aered/admm/admm.hpp"

#include "aered/core/metrics.hpp"
#include "aered/nn/train.hpp"

#include <cmath>
#include <future>

namespace aered::admm {
namespace {

void require_congruent(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": shapes are not congruent");
  }
}

void score(HistoryEntry& h, const Matrix& encoded, const Matrix& decoder, const GroundTruth& truth) {
  if (!truth.abundances && !truth.endmembers && !truth.clean) return;
  const AbundanceMatrix A(encoded);
  const EndmemberMatrix S(decoder);
  const Matrix recon = decoder * encoded;
  const auto m = evaluate_unmixing(truth.clean ? *truth.clean : recon, A, S, truth.abundances, truth.endmembers);
  h.rmse = m.rmse;
  h.msad = m.msad;
  h.msid = m.msid;
  if (truth.clean) h.psnr = m.psnr;
}

}  // namespace

double AdmmConfig::penalty_for_snr(double snr_db) {
  if (snr_db <= 10.0) return 0.5;
  if (snr_db < 30.0) return 0.1;
  return 0.01;
}

void AdmmConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda", "must be finite and >= 0");
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw ConfigError("mu", "must be finite and >= 0");
  if (lambda > 0.0 && mu == 0.0) throw ConfigError("mu", "must be > 0 when lambda > 0");
  if (outer_iterations < 1) throw ConfigError("K", "must be >= 1");
  if (inner_iterations < 1) throw ConfigError("J", "must be >= 1");
  if (epochs < 1) throw ConfigError("epochs", "must be >= 1");
  if (!(lr.encoder > 0.0)) throw ConfigError("lr", "must be > 0");
  if (!(lr.decoder >= 0.0)) throw ConfigError("lr_decoder", "must be >= 0");
  if (endmembers < 1) throw ConfigError("R", "must be >= 1");
  if (threads < 1) throw ConfigError("threads", "must be >= 1");
  denoiser.validate();
}

Matrix update_abundance(const Matrix& A, const Matrix& encoded, const Matrix& G, double lambda, double mu,
                        long inner_iterations, Grid grid, const denoise::DenoiserSpec& denoiser, int threads,
                        const Matrix* first_denoised) {
  if (!(lambda >= 0.0)) throw ValueError("update_abundance: lambda must be >= 0");
  if (inner_iterations < 1) throw ValueError("update_abundance: J must be >= 1");
  require_congruent(A, encoded, "update_abundance");
  require_congruent(A, G, "update_abundance");
  const Matrix target = encoded + G;
  if (lambda == 0.0) return target;
  if (!(mu > 0.0)) throw ValueError("update_abundance: mu must be > 0 when lambda > 0");

  const double scale = 1.0 / (lambda + mu);
  Matrix current = A;
  for (long j = 0; j < inner_iterations; ++j) {
    Matrix denoised = (j == 0 && first_denoised) ? *first_denoised : denoise::denoise(current, grid, denoiser, threads);
    current = scale * (lambda * denoised + mu * target);
    if (!current.allFinite()) {
      throw ValueError("update_abundance: non-finite value at inner iteration " + std::to_string(j + 1));
    }
  }
  return current;
}

Matrix update_dual(const Matrix& G, const Matrix& A, const Matrix& encoded) {
  require_congruent(G, A, "update_dual");
  require_congruent(G, encoded, "update_dual");
  return G - A + encoded;
}

AdmmResult run_ae_red(const HyperspectralImage& Y, const AdmmConfig& config, const nn::AeParams* init,
                      const GroundTruth& truth) {
  config.validate();
  const nn::EncoderSpec spec = nn::EncoderSpec::cnn(Y.bands(), config.endmembers, config.encoder_widths);
  const nn::EncoderInput input(spec, Y);
  const Grid grid = Y.grid();

  AdmmState state;
  state.params = init ? *init : nn::init_params(spec, Y, config.seed);
  nn::check_params(state.params, spec);
  state.adam = nn::AdamState::zeros_like(state.params);
  Matrix encoded = nn::encode(state.params, spec, input);
  state.A = encoded;
  state.G = Matrix::Zero(encoded.rows(), encoded.cols());

  nn::TrainOptions train;
  train.epochs = config.epochs;
  train.lr = config.lr;

  const bool overlap = config.overlap_denoiser && config.inner_iterations == 1 && config.lambda > 0.0;
  for (long k = 1; k <= config.outer_iterations; ++k) {
    try {
      std::future<Matrix> pending;
      if (overlap) {
        // C(A^{k-1}) does not depend on the Theta-update, so it can run alongside it.
        pending = std::async(std::launch::async, [&, prev = state.A] {
          return denoise::denoise(prev, grid, config.denoiser, config.threads);
        });
      }
      const nn::TrainReport report = nn::train_ae(state.params, state.adam, spec, input, state.A, state.G,
                                                  config.mu, train);
      encoded = report.encoded;
      Matrix denoised;
      if (overlap) denoised = pending.get();
      state.A = update_abundance(state.A, encoded, state.G, config.lambda, config.mu, config.inner_iterations, grid,
                                 config.denoiser, config.threads, overlap ? &denoised : nullptr);
      state.G = update_dual(state.G, state.A, encoded);
      if (!state.G.allFinite()) throw ValueError("dual variable is not finite");

      HistoryEntry h;
      h.k = k;
      h.ae_loss = report.final_loss.total;
      h.reconstruction = report.final_loss.reconstruction;
      h.red_value = config.lambda > 0.0 ? denoise::red_value(state.A, grid, config.denoiser, config.threads) : 0.0;
      h.primal_residual = (state.A - encoded).norm();
      const auto drift = simplex_violation(state.A);
      h.simplex_drift = std::max(drift.sum_error, -drift.negativity);
      score(h, encoded, state.params.decoder, truth);
      state.history.push_back(h);
      state.k = k;
    } catch (const Error& e) {
      throw AdmmFailure(k, e.what(), state.history);
    }
  }

  AdmmResult result{AbundanceMatrix(encoded), EndmemberMatrix(state.params.decoder), spec, std::move(state)};
  return result;
}

}  // namespace aered::admm
