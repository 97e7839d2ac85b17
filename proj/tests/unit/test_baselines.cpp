#include "aered/baselines/baselines.hpp"
#include "aered/core/metrics.hpp"
#include "aered/synth/scene.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <random>

using namespace aered;
using namespace aered::baselines;

namespace {

synth::SyntheticScene scene(double snr, std::uint64_t seed) {
  synth::SceneConfig c;
  c.height = 20;
  c.width = 20;
  c.endmembers = 4;
  c.bands = 40;
  c.correlation_length = 3.0;
  c.snr_db = snr;
  c.seed = seed;
  return synth::make_scene(c);
}

}  // namespace

TEST_CASE("gram spectral norm matches the eigen solver") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Matrix S(12, 4);
  for (Index k = 0; k < S.size(); ++k) S.data()[k] = u(rng);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S.transpose() * S);
  CHECK(gram_spectral_norm(S, 200) == doctest::Approx(eig.eigenvalues().maxCoeff()).epsilon(1e-10));
}

TEST_CASE("fcls recovers noise-free abundances") {
  const auto s = scene(std::numeric_limits<double>::infinity(), 2);
  FclsOptions opt;
  opt.iterations = 5000;
  const auto r = fcls(s.noisy, s.endmembers, opt);
  CHECK(rmse(s.abundances, r.abundances) < 1e-3);
  const auto v = simplex_violation(r.abundances.data());
  CHECK(v.sum_error < 1e-9);
  CHECK(v.negativity == 0.0);
}

TEST_CASE("fcls objective never increases") {
  const auto s = scene(20.0, 3);
  const auto r = fcls(s.noisy, s.endmembers);
  REQUIRE(r.losses.size() == 500);
  for (std::size_t k = 1; k < r.losses.size(); ++k) CHECK(r.losses[k] <= r.losses[k - 1] * (1 + 1e-12));
  CHECK(r.step > 0.0);
}

TEST_CASE("fcls with one endmember returns ones") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix Y(5, 6);
  for (Index k = 0; k < Y.size(); ++k) Y.data()[k] = u(rng);
  const auto r = fcls(HyperspectralImage(Y, {2, 3}), EndmemberMatrix(Matrix::Ones(5, 1)));
  CHECK((r.abundances.data().array() == 1.0).all());
}

TEST_CASE("fcls is equivariant to permuting the endmembers") {
  const auto s = scene(30.0, 5);
  const std::vector<Index> perm{2, 0, 3, 1};
  const auto a = fcls(s.noisy, s.endmembers);
  const auto b = fcls(s.noisy, s.endmembers.permuted_columns(perm));
  CHECK((b.abundances.data() - a.abundances.permuted_rows(perm).data()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("fcls rejects band mismatches") {
  const auto s = scene(30.0, 6);
  CHECK_THROWS_AS(fcls(s.noisy, EndmemberMatrix(Matrix::Ones(7, 4))), DimensionError);
}

TEST_CASE("plain autoencoder configuration and determinism") {
  admm::AdmmConfig c;
  c.endmembers = 4;
  c.outer_iterations = 3;
  c.epochs = 10;
  c.encoder_widths = {8, 8, 6, 8};
  const auto p = plain_ae_config(c);
  CHECK(p.lambda == 0.0);
  CHECK(p.mu == 0.0);
  CHECK(p.outer_iterations == 1);
  CHECK(p.epochs == 30);
  CHECK(p.denoiser.kind == denoise::Kind::identity);

  const auto s = scene(25.0, 7);
  const auto a = plain_ae(s.noisy, c);
  const auto b = plain_ae(s.noisy, c);
  CHECK(a.abundances.data() == b.abundances.data());
  CHECK(a.endmembers.data() == b.endmembers.data());
  CHECK(a.state.history.size() == 1);
}
