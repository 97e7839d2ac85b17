#include "aered/nn/train.hpp"

#include "aered/core/mixing.hpp"

#include <cmath>
#include <random>

namespace aered::nn {

TrainReport train_ae(AeParams& params, AdamState& adam, const EncoderSpec& spec, const EncoderInput& input,
                     const Matrix& A, const Matrix& G, double mu, const TrainOptions& options) {
  if (options.epochs < 1) throw ValueError("train_ae: epochs must be >= 1");
  if (adam.first_moment.encoder.size() != params.encoder.size()) adam = AdamState::zeros_like(params);

  TrainReport report;
  report.losses.reserve(static_cast<std::size_t>(options.epochs));
  for (long epoch = 0; epoch < options.epochs; ++epoch) {
    LossAndGradients lg = ae_loss_gradients(params, spec, input, A, G, mu, options.fixed_abundances);
    if (!std::isfinite(lg.loss.total)) throw TrainingDivergence(epoch, "loss is not finite");
    report.losses.push_back(lg.loss.total);
    try {
      adam_step(params, lg.gradients, adam, options.lr);
    } catch (const ValueError& e) {
      throw TrainingDivergence(epoch, e.what());
    }
  }

  report.encoded = options.fixed_abundances ? *options.fixed_abundances : encode(params, spec, input);
  report.final_loss.reconstruction = (input.image() - lmm_product(params.decoder, report.encoded)).squaredNorm();
  report.final_loss.coupling = (A - report.encoded - G).squaredNorm();
  report.final_loss.total = report.final_loss.reconstruction + mu * report.final_loss.coupling;
  if (!std::isfinite(report.final_loss.total)) throw TrainingDivergence(options.epochs, "loss is not finite");
  return report;
}

std::vector<Index> select_extreme_pixels(const Matrix& Y, Index count, std::uint64_t seed) {
  const Index N = Y.cols();
  if (count < 1) throw ValueError("pixel selection: count must be >= 1");
  if (N < count) throw ValueError("pixel selection: image has fewer pixels than endmembers");

  // Noise-reducing projection onto the dominant R-dimensional signal subspace.
  const Index dims = std::min(count, Y.rows());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(Y * Y.transpose());
  const Matrix basis = eig.eigenvectors().rightCols(dims);
  const Matrix X = basis.transpose() * Y;

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> pick(0, N - 1);
  const Index anchor = pick(rng);

  Index first = 0;
  (X.colwise() - X.col(anchor)).colwise().squaredNorm().maxCoeff(&first);
  std::vector<Index> chosen{first};

  const double scale = std::max(X.colwise().squaredNorm().maxCoeff(), 1e-300);
  const Vector origin = X.col(first);
  Matrix q(X.rows(), 0);
  for (Index m = 1; m < count; ++m) {
    Matrix centered = X.colwise() - origin;
    if (q.cols() > 0) centered -= q * (q.transpose() * centered);
    Index best = 0;
    const double dist = centered.colwise().squaredNorm().maxCoeff(&best);
    if (!(dist > 1e-12 * scale)) {
      throw ValueError("pixel selection: image has fewer than " + std::to_string(count) + " distinct pixels");
    }
    q.conservativeResize(Eigen::NoChange, q.cols() + 1);
    q.col(q.cols() - 1) = centered.col(best) / std::sqrt(dist);
    chosen.push_back(best);
  }
  return chosen;
}

AeParams init_params(const EncoderSpec& spec, const HyperspectralImage& Y, std::uint64_t seed) {
  spec.validate();
  if (Y.bands() != spec.input_channels) {
    throw DimensionError("init_params: image band count does not match encoder input channels");
  }
  std::mt19937_64 rng(seed);
  AeParams p;
  for (std::size_t l = 0; l < spec.blocks.size(); ++l) {
    const auto& b = spec.blocks[l];
    const Index fan_in = b.kernel_size * b.kernel_size * spec.block_input_channels(l);
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    ConvBlock block{Matrix(b.out_channels, fan_in), Vector::Zero(b.out_channels)};
    for (Index k = 0; k < block.kernel.size(); ++k) block.kernel.data()[k] = u(rng);
    p.encoder.push_back(std::move(block));
  }

  const Index R = spec.endmembers();
  const auto pixels = select_extreme_pixels(Y.data(), R, rng());
  p.decoder.resize(Y.bands(), R);
  for (Index r = 0; r < R; ++r) p.decoder.col(r) = Y.data().col(pixels[r]).cwiseMax(0.0);
  return p;
}

}  // namespace aered::nn
