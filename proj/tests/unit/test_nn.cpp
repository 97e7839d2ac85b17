#include "aered/core/error.hpp"
#include "aered/core/mixing.hpp"
#include "aered/nn/adam.hpp"
#include "aered/nn/checkpoint.hpp"
#include "aered/nn/network.hpp"
#include "aered/nn/train.hpp"
#include "aered/synth/scene.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>

using namespace aered;
using namespace aered::nn;

namespace {

// Visits every parameter block in a fixed order as a flat span.
template <typename P, typename F>
void for_each_block(P& p, F&& f) {
  for (auto& b : p.encoder) {
    f(b.kernel.data(), b.kernel.size());
    f(b.bias.data(), b.bias.size());
  }
  f(p.decoder.data(), p.decoder.size());
}

Vector flatten(const AeParams& p) {
  Vector v(p.size());
  Index at = 0;
  for_each_block(p, [&](const double* d, Index n) {
    std::copy(d, d + n, v.data() + at);
    at += n;
  });
  return v;
}

AeParams unflatten(const AeParams& shape, const Vector& v) {
  AeParams p = shape;
  Index at = 0;
  for_each_block(p, [&](double* d, Index n) {
    std::copy(v.data() + at, v.data() + at + n, d);
    at += n;
  });
  return p;
}

HyperspectralImage random_image(Index B, Grid grid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix Y(B, grid.pixels());
  for (Index k = 0; k < Y.size(); ++k) Y.data()[k] = u(rng);
  return HyperspectralImage(Y, grid);
}

// Perturbs all parameters so biases are nonzero and activations avoid exact kinks.
void jitter(AeParams& p, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  for_each_block(p, [&](double* d, Index count) {
    for (Index k = 0; k < count; ++k) d[k] += n(rng);
  });
  p.decoder = p.decoder.cwiseAbs();
}

}  // namespace

TEST_CASE("encoder layout and output") {
  const auto spec = EncoderSpec::cnn(6, 3);
  REQUIRE(spec.blocks.size() == 5);
  CHECK(spec.blocks[0].kernel_size == 3);
  CHECK(spec.blocks[1].kernel_size == 3);
  CHECK(spec.blocks[2].kernel_size == 1);
  CHECK(spec.blocks[0].out_channels == 64);
  CHECK(spec.blocks[3].out_channels == 6);
  CHECK(spec.blocks[4].activation == Activation::softmax);
  CHECK(spec.endmembers() == 3);

  std::mt19937_64 rng(1);
  const auto Y = random_image(6, {5, 4}, rng);
  const auto params = init_params(spec, Y, 2);
  const auto A = encoder_forward(params, spec, Y);
  CHECK(A.data().rows() == 3);
  CHECK(A.data().cols() == 20);
  CHECK(A.data().minCoeff() > 0.0);
  CHECK((A.data().colwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK(params.size() == flatten(params).size());
}

TEST_CASE("im2col3 and col2im3_add are adjoint") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  const Grid grid{4, 5};
  Matrix X(3, grid.pixels()), Z(27, grid.pixels());
  for (Index k = 0; k < X.size(); ++k) X.data()[k] = n(rng);
  for (Index k = 0; k < Z.size(); ++k) Z.data()[k] = n(rng);
  const Matrix cols = im2col3(X, grid);
  Matrix adj = Matrix::Zero(3, grid.pixels());
  col2im3_add(Z, grid, adj);
  CHECK(std::abs((cols.array() * Z.array()).sum() - (X.array() * adj.array()).sum()) < 1e-10);
  // Center tap (index 4) of every column is the pixel itself.
  CHECK((cols.middleRows(4 * 3, 3) - X).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("analytic gradients match central differences") {
  std::mt19937_64 rng(3);
  const Grid grid{4, 4};
  const auto spec = EncoderSpec::cnn(6, 2, {5, 4, 3, 4});
  for (int trial = 0; trial < 3; ++trial) {
    const auto Y = random_image(6, grid, rng);
    auto params = init_params(spec, Y, 10 + trial);
    jitter(params, rng, 0.05);
    const Matrix A = oracle::random_simplex(2, grid.pixels(), rng);
    const Matrix G = 0.1 * oracle::random_simplex(2, grid.pixels(), rng);
    const double mu = 0.3;

    const auto lg = ae_loss_gradients(params, spec, Y, A, G, mu);
    const Vector analytic = flatten(lg.gradients);
    const auto f = [&](const Vector& x) { return ae_loss(unflatten(params, x), spec, Y, A, G, mu).total; };
    const Vector numeric = oracle::central_difference(f, flatten(params), 1e-6);
    CHECK(oracle::relative_error(analytic, numeric) < 1e-5);
    CHECK(lg.loss.total == doctest::Approx(f(flatten(params))).epsilon(1e-12));
  }
}

TEST_CASE("gradients vanish at an exact minimum") {
  std::mt19937_64 rng(4);
  const Grid grid{4, 4};
  const auto spec = EncoderSpec::cnn(6, 2, {5, 4, 3, 4});
  const auto Y0 = random_image(6, grid, rng);
  auto params = init_params(spec, Y0, 5);
  jitter(params, rng, 0.05);
  // With a zero first kernel, E does not depend on Y, so Y = S E and A = E + G is an exact fit.
  params.encoder[0].kernel.setZero();
  const Matrix E = encode(params, spec, EncoderInput(spec, Y0));
  const HyperspectralImage Y(lmm_product(params.decoder, E), grid);
  const Matrix G = 0.2 * oracle::random_simplex(2, grid.pixels(), rng);
  const Matrix A = E + G;
  const auto lg = ae_loss_gradients(params, spec, Y, A, G, 0.7);
  CHECK(lg.loss.total < 1e-20);
  CHECK(flatten(lg.gradients).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("the coupling term does not reach the decoder") {
  std::mt19937_64 rng(5);
  const Grid grid{3, 4};
  const auto spec = EncoderSpec::cnn(5, 3, {4, 4, 3, 6});
  const auto Y = random_image(5, grid, rng);
  const auto params = init_params(spec, Y, 6);
  const Matrix A = oracle::random_simplex(3, grid.pixels(), rng);
  const Matrix G = Matrix::Zero(3, grid.pixels());
  const auto g0 = ae_loss_gradients(params, spec, Y, A, G, 0.0);
  const auto g1 = ae_loss_gradients(params, spec, Y, A, G, 5.0);
  CHECK((g0.gradients.decoder - g1.gradients.decoder).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((g0.gradients.encoder[0].kernel - g1.gradients.encoder[0].kernel).norm() > 1e-6);
}

TEST_CASE("first Adam step moves each parameter by about the learning rate") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0.0, 1.0);
  const auto spec = EncoderSpec::cnn(4, 2, {3, 3, 3, 4});
  const auto Y = random_image(4, {3, 3}, rng);
  auto params = init_params(spec, Y, 7);
  params.decoder.array() += 1.0;
  AeParams grads = params.zeros_like();
  for_each_block(grads, [&](double* d, Index count) {
    for (Index k = 0; k < count; ++k) d[k] = n(rng);
  });
  const Vector before = flatten(params);
  auto adam = AdamState::zeros_like(params);
  const LearningRates lr{1e-3, 1e-4};
  adam_step(params, grads, adam, lr);
  const Vector delta = flatten(params) - before;
  const Vector g = flatten(grads);
  const Index decoder_start = delta.size() - params.decoder.size();
  for (Index k = 0; k < delta.size(); ++k) {
    if (std::abs(g[k]) < 1e-3) continue;
    const double rate = k >= decoder_start ? lr.decoder : lr.encoder;
    CHECK(std::abs(delta[k] + rate * (g[k] > 0 ? 1.0 : -1.0)) < 1e-3 * rate + 1e-12);
  }
  CHECK(adam.step == 1);
}

TEST_CASE("zero gradients leave parameters unchanged and the decoder stays nonnegative") {
  std::mt19937_64 rng(7);
  const auto spec = EncoderSpec::cnn(4, 2, {3, 3, 3, 4});
  const auto Y = random_image(4, {3, 3}, rng);
  auto params = init_params(spec, Y, 8);
  const Vector before = flatten(params);
  auto adam = AdamState::zeros_like(params);
  adam_step(params, params.zeros_like(), adam, {});
  CHECK(flatten(params) == before);

  AeParams push = params.zeros_like();
  push.decoder.setConstant(1.0);  // drives all endmembers down
  const LearningRates big{1e-3, 10.0};
  adam_step(params, push, adam, big);
  CHECK(params.decoder.minCoeff() == 0.0);
}

TEST_CASE("non-finite gradients name the block") {
  std::mt19937_64 rng(8);
  const auto spec = EncoderSpec::cnn(4, 2, {3, 3, 3, 4});
  const auto Y = random_image(4, {3, 3}, rng);
  auto params = init_params(spec, Y, 9);
  auto adam = AdamState::zeros_like(params);
  AeParams grads = params.zeros_like();
  grads.encoder[2].kernel(0, 0) = std::numeric_limits<double>::quiet_NaN();
  const Vector before = flatten(params);
  try {
    adam_step(params, grads, adam, {});
    FAIL("expected ValueError");
  } catch (const ValueError& e) {
    CHECK(std::string(e.what()).find("encoder[2].kernel") != std::string::npos);
  }
  CHECK(flatten(params) == before);
}

TEST_CASE("training smoke test decreases the loss") {
  synth::SceneConfig c;
  c.height = 16;
  c.width = 16;
  c.endmembers = 3;
  c.bands = 10;
  c.correlation_length = 3.0;
  c.snr_db = 30.0;
  c.seed = 1;
  const auto scene = synth::make_scene(c);
  const auto spec = EncoderSpec::cnn(10, 3);
  auto params = init_params(spec, scene.noisy, 1);
  auto adam = AdamState::zeros_like(params);
  const EncoderInput input(spec, scene.noisy);
  const Matrix zero = Matrix::Zero(3, 256);
  TrainOptions opt;
  opt.epochs = 200;
  const auto report = train_ae(params, adam, spec, input, zero, zero, 0.0, opt);
  REQUIRE(report.losses.size() == 200);
  long non_increasing = 0;
  for (std::size_t e = 1; e < report.losses.size(); ++e)
    if (report.losses[e] <= report.losses[e - 1]) ++non_increasing;
  CHECK(non_increasing >= static_cast<long>(0.95 * 199));
  CHECK(report.final_loss.total < report.losses.front());
  CHECK(adam.step == 200);
}

TEST_CASE("training rejects a zero epoch budget") {
  std::mt19937_64 rng(13);
  const auto spec = EncoderSpec::cnn(4, 2, {3, 3, 3, 4});
  const auto Y = random_image(4, {3, 3}, rng);
  auto params = init_params(spec, Y, 1);
  auto adam = AdamState::zeros_like(params);
  const Matrix zero = Matrix::Zero(2, 9);
  TrainOptions opt;
  opt.epochs = 0;
  CHECK_THROWS_AS(train_ae(params, adam, spec, EncoderInput(spec, Y), zero, zero, 0.0, opt), ValueError);
}

TEST_CASE("bypass mode recovers the least-squares endmembers") {
  std::mt19937_64 rng(14);
  const Grid grid{6, 6};
  const Matrix A = oracle::random_simplex(3, grid.pixels(), rng);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  Matrix S(8, 3);
  for (Index k = 0; k < S.size(); ++k) S.data()[k] = u(rng);
  const HyperspectralImage Y(oracle::naive_matmul(S, A), grid);
  const auto spec = EncoderSpec::cnn(8, 3, {4, 4, 4, 6});
  auto params = init_params(spec, Y, 15);
  const auto encoder_before = params.encoder[0].kernel;
  auto adam = AdamState::zeros_like(params);
  TrainOptions opt;
  opt.epochs = 3000;
  opt.lr = {1e-3, 1e-2};
  opt.fixed_abundances = &A;
  const Matrix zero = Matrix::Zero(3, grid.pixels());
  const auto report = train_ae(params, adam, spec, EncoderInput(spec, Y), zero, zero, 0.0, opt);
  CHECK(params.encoder[0].kernel == encoder_before);
  CHECK((params.decoder - S).cwiseAbs().maxCoeff() < 1e-2);
  CHECK(report.final_loss.reconstruction < 1e-3);
}

TEST_CASE("initialization selects pure pixels") {
  std::mt19937_64 rng(16);
  const Grid grid{8, 8};
  Matrix A = oracle::random_simplex(4, grid.pixels(), rng);
  // Squash mixtures toward the barycenter, then plant one pure pixel per endmember.
  A = 0.5 * A + 0.5 * Matrix::Constant(4, grid.pixels(), 0.25);
  const std::vector<Index> pure{5, 17, 40, 63};
  for (Index r = 0; r < 4; ++r) {
    A.col(pure[r]).setZero();
    A(r, pure[r]) = 1.0;
  }
  const auto S = synth::procedural_endmembers(30, 4, 3);
  const Matrix Y = S.data() * A;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto picked = select_extreme_pixels(Y, 4, seed);
    std::sort(picked.begin(), picked.end());
    CHECK(picked == pure);
  }
  const auto spec = EncoderSpec::cnn(30, 4);
  const auto params = init_params(spec, HyperspectralImage(Y, grid), 4);
  for (Index r = 0; r < 4; ++r) {
    double best = 1e9;
    for (Index q = 0; q < 4; ++q) best = std::min(best, (params.decoder.col(q) - S.data().col(r)).norm());
    CHECK(best < 1e-12);
  }
  CHECK_THROWS_AS(select_extreme_pixels(Matrix::Ones(30, 10), 2, 1), ValueError);
}

TEST_CASE("init_params is deterministic in the seed") {
  std::mt19937_64 rng(17);
  const auto Y = random_image(6, {5, 5}, rng);
  const auto spec = EncoderSpec::cnn(6, 3);
  CHECK(flatten(init_params(spec, Y, 3)) == flatten(init_params(spec, Y, 3)));
  CHECK(flatten(init_params(spec, Y, 3)) != flatten(init_params(spec, Y, 4)));
  for (const auto& b : init_params(spec, Y, 3).encoder) CHECK(b.bias.isZero());
}

TEST_CASE("checkpoints round trip bit for bit") {
  std::mt19937_64 rng(18);
  const auto Y = random_image(6, {4, 4}, rng);
  const auto spec = EncoderSpec::cnn(6, 2, {5, 4, 3, 4});
  auto params = init_params(spec, Y, 3);
  jitter(params, rng, 0.1);
  const auto dir = std::filesystem::temp_directory_path() / "aered_nn_checkpoint";
  std::filesystem::remove_all(dir);
  save_checkpoint(dir, {spec, params, 42});
  const auto loaded = load_checkpoint(dir);
  CHECK(loaded.step == 42);
  REQUIRE(loaded.spec.blocks.size() == spec.blocks.size());
  for (std::size_t l = 0; l < spec.blocks.size(); ++l) {
    CHECK(loaded.spec.blocks[l].kernel_size == spec.blocks[l].kernel_size);
    CHECK(loaded.spec.blocks[l].out_channels == spec.blocks[l].out_channels);
    CHECK(loaded.spec.blocks[l].activation == spec.blocks[l].activation);
  }
  CHECK(flatten(loaded.params) == flatten(params));
  CHECK(encode(loaded.params, loaded.spec, EncoderInput(loaded.spec, Y)) ==
        encode(params, spec, EncoderInput(spec, Y)));
}
