#include "aered/baselines/baselines.hpp"

#include "aered/core/error.hpp"
#include "aered/core/simplex.hpp"

#include <cmath>

namespace aered::baselines {

double gram_spectral_norm(const Matrix& S, int iterations) {
  const Matrix gram = S.transpose() * S;
  Vector v = Vector::Ones(gram.rows()).normalized();
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const Vector w = gram * v;
    lambda = v.dot(w);
    const double n = w.norm();
    if (n == 0.0) return 0.0;
    v = w / n;
  }
  return std::max(lambda, v.dot(gram * v));
}

FclsResult fcls(const HyperspectralImage& Y, const EndmemberMatrix& S, const FclsOptions& options) {
  if (options.iterations < 1) throw ValueError("fcls: iterations must be >= 1");
  if (S.bands() != Y.bands()) throw DimensionError("fcls: endmember band count does not match the image");

  const Index R = S.endmembers();
  const Matrix gram = S.data().transpose() * S.data();
  const Matrix sty = S.data().transpose() * Y.data();
  const double y2 = Y.data().squaredNorm();
  const double L = gram_spectral_norm(S.data(), options.power_iterations);
  if (!(L > 0.0)) throw ValueError("fcls: endmember matrix has zero spectral norm");

  // 0.5 ||Y - SA||^2 via the Gram matrix.
  auto loss = [&](const Matrix& A) {
    return 0.5 * ((A.transpose() * gram).cwiseProduct(A.transpose()).sum() - 2.0 * sty.cwiseProduct(A).sum() + y2);
  };

  FclsResult out;
  out.step = 1.0 / L;
  out.losses.reserve(static_cast<std::size_t>(options.iterations));
  Matrix A = Matrix::Constant(R, Y.pixels(), 1.0 / static_cast<double>(R));
  double previous = loss(A);
  int increases = 0;
  const double slack = 1e-12 * (y2 + 1e-300);
  for (long it = 0; it < options.iterations; ++it) {
    Matrix next = A - out.step * (gram * A - sty);
    for (Index n = 0; n < next.cols(); ++n) project_simplex(next.col(n));
    A = std::move(next);
    const double current = loss(A);
    out.losses.push_back(current);
    increases = current > previous + slack ? increases + 1 : 0;
    if (increases >= options.max_increases) {
      throw ValueError("fcls: loss increased for " + std::to_string(increases) +
                       " consecutive steps; use a smaller step");
    }
    previous = current;
  }
  out.abundances = AbundanceMatrix(std::move(A));
  return out;
}

admm::AdmmConfig plain_ae_config(const admm::AdmmConfig& config) {
  admm::AdmmConfig plain = config;
  plain.lambda = 0.0;
  plain.mu = 0.0;
  plain.epochs = config.outer_iterations * config.epochs;
  plain.outer_iterations = 1;
  plain.denoiser.kind = denoise::Kind::identity;
  plain.overlap_denoiser = false;
  return plain;
}

admm::AdmmResult plain_ae(const HyperspectralImage& Y, const admm::AdmmConfig& config, const nn::AeParams* init,
                          const admm::GroundTruth& truth) {
  return admm::run_ae_red(Y, plain_ae_config(config), init, truth);
}

}  // namespace aered::baselines
