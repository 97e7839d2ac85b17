#include "aered/core/error.hpp"
#include "aered/core/fmx.hpp"
#include "aered/core/metrics.hpp"
#include "aered/core/mixing.hpp"
#include "aered/core/simplex.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numeric>
#include <random>
#include <sstream>

using namespace aered;

namespace {

EndmemberMatrix random_endmembers(Index B, Index R, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Matrix S(B, R);
  for (Index k = 0; k < S.size(); ++k) S.data()[k] = u(rng);
  return EndmemberMatrix(S);
}

}  // namespace

TEST_CASE("lmm_mix with identity endmembers returns the abundances") {
  std::mt19937_64 rng(3);
  const AbundanceMatrix A(oracle::random_simplex(4, 6, rng));
  const auto Y = lmm_mix(EndmemberMatrix(Matrix::Identity(4, 4)), A, {2, 3});
  CHECK(Y.data() == A.data());
  CHECK(Y.height() == 2);
  CHECK(Y.width() == 3);
}

TEST_CASE("lmm_mix with one-hot abundances reproduces endmember columns") {
  std::mt19937_64 rng(4);
  const auto S = random_endmembers(5, 3, rng);
  Matrix onehot = Matrix::Zero(3, 3);
  onehot(2, 0) = onehot(0, 1) = onehot(1, 2) = 1.0;
  const auto Y = lmm_mix(S, AbundanceMatrix(onehot), {1, 3});
  CHECK(Y.data().col(0) == S.data().col(2));
  CHECK(Y.data().col(1) == S.data().col(0));
  CHECK(Y.data().col(2) == S.data().col(1));
}

TEST_CASE("lmm_mix matches a triple-loop product") {
  std::mt19937_64 rng(5);
  const auto S = random_endmembers(3, 2, rng);
  const AbundanceMatrix A(oracle::random_simplex(2, 4, rng));
  const auto Y = lmm_mix(S, A, {2, 2});
  CHECK((Y.data() - oracle::naive_matmul(S.data(), A.data())).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("lmm_mix rejects mismatched shapes") {
  const EndmemberMatrix S(Matrix::Ones(4, 3));
  const AbundanceMatrix A(Matrix::Constant(2, 4, 0.5));
  CHECK_THROWS_AS(lmm_mix(S, A, {2, 2}), DimensionError);
  const AbundanceMatrix A3(Matrix::Constant(3, 4, 1.0 / 3.0));
  CHECK_THROWS_AS(lmm_mix(S, A3, {3, 3}), DimensionError);
}

TEST_CASE("lmm_mix stays inside the convex-combination band bound") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const auto S = random_endmembers(7, 3, rng);
    const AbundanceMatrix A(oracle::random_simplex(3, 10, rng));
    const auto Y = lmm_mix(S, A, {2, 5});
    CHECK(Y.data().minCoeff() >= 0.0);
    CHECK(Y.data().maxCoeff() <= S.data().rowwise().sum().maxCoeff() + 1e-12);
  }
}

TEST_CASE("domain types validate their invariants") {
  CHECK_THROWS_AS(AbundanceMatrix(Matrix::Constant(2, 3, 0.4)), ValueError);
  Matrix neg(2, 1);
  neg << 1.5, -0.5;
  CHECK_THROWS_AS(AbundanceMatrix{neg}, ValueError);
  Matrix zero_col = Matrix::Ones(3, 2);
  zero_col.col(1).setZero();
  CHECK_THROWS_AS(EndmemberMatrix{zero_col}, ValueError);
  CHECK_THROWS_AS(EndmemberMatrix(-Matrix::Ones(3, 2)), ValueError);
  CHECK_THROWS_AS(HyperspectralImage(Matrix::Ones(3, 5), {2, 2}), DimensionError);
}

TEST_CASE("simplex projection examples") {
  SUBCASE("point already on the simplex is unchanged") {
    Matrix m(3, 1);
    m << 0.2, 0.3, 0.5;
    CHECK((project_simplex_columns(m).data() - m).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("(1, 0.5) projects to (0.75, 0.25)") {
    Vector v(2);
    v << 1.0, 0.5;
    const Vector grid = oracle::grid_project_2d(v);
    const Vector shift = oracle::shift_search_project(v);
    CHECK(std::abs(grid[0] - 0.75) < 1e-5);
    CHECK(std::abs(shift[0] - 0.75) < 1e-5);
    const auto p = project_simplex_columns(v);
    CHECK(p.data()(0, 0) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(p.data()(1, 0) == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("(-1, -1) projects to the barycenter") {
    Vector v(2);
    v << -1.0, -1.0;
    CHECK(std::abs(oracle::grid_project_2d(v)[0] - 0.5) < 1e-5);
    const auto p = project_simplex_columns(v);
    CHECK(p.data()(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p.data()(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("non-finite input is rejected") {
    Matrix m = Matrix::Zero(2, 2);
    m(1, 1) = std::nan("");
    CHECK_THROWS_AS(project_simplex_columns(m), ValueError);
  }
}

TEST_CASE("simplex projection agrees with the shift-search oracle on random inputs") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Vector v(4);
    for (auto& x : v) x = n(rng);
    const Vector expect = oracle::shift_search_project(v, 1e-5);
    const Vector got = project_simplex_columns(v).data().col(0);
    CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-4);
  }
}

TEST_CASE("rmse examples and properties") {
  Matrix a(2, 1), b(2, 1);
  a << 1.0, 0.0;
  b << 0.6, 0.4;
  CHECK(std::abs(rmse(AbundanceMatrix(a), AbundanceMatrix(b)) - 0.4) < 1e-9);
  CHECK(rmse(AbundanceMatrix(a), AbundanceMatrix(a)) == 0.0);
  CHECK(rmse(AbundanceMatrix(Matrix::Ones(1, 7)), AbundanceMatrix(Matrix::Ones(1, 7))) == 0.0);
  CHECK_THROWS_AS(rmse(AbundanceMatrix(a), AbundanceMatrix(Matrix::Constant(2, 2, 0.5))), DimensionError);

  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const AbundanceMatrix x(oracle::random_simplex(3, 8, rng));
    const AbundanceMatrix y(oracle::random_simplex(3, 8, rng));
    CHECK(rmse(x, y) == rmse(y, x));
    CHECK(rmse(x, y) > 0.0);
  }
}

TEST_CASE("msad examples and invariances") {
  Matrix s(2, 1), e(2, 1);
  s << 1.0, 0.0;
  e << 1.0, 1.0;
  CHECK(std::abs(msad(EndmemberMatrix(s), EndmemberMatrix(e)) - std::acos(1.0 / std::sqrt(2.0))) < 1e-9);
  CHECK(std::abs(msad(EndmemberMatrix(s), EndmemberMatrix(e)) - 0.7853981633974483) < 1e-9);

  std::mt19937_64 rng(13);
  const auto S = random_endmembers(10, 4, rng);
  CHECK(msad(S, S) < 1e-7);
  CHECK(msad(S, EndmemberMatrix(2.0 * S.data())) < 1e-7);

  const auto T = random_endmembers(10, 4, rng);
  Vector scale(4);
  scale << 0.3, 2.0, 5.0, 1.1;
  const double base = msad(S, T);
  CHECK(msad(S, EndmemberMatrix(T.data() * scale.asDiagonal())) == doctest::Approx(base).epsilon(1e-12));

  std::vector<Index> perm{2, 0, 3, 1};
  CHECK(msad(S, T.permuted_columns(perm)) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("endmember alignment recovers a shuffled copy") {
  std::mt19937_64 rng(14);
  const auto S = random_endmembers(12, 5, rng);
  const std::vector<Index> shuffle{3, 1, 4, 0, 2};
  const auto perm = align_endmembers(S, S.permuted_columns(shuffle));
  for (Index r = 0; r < 5; ++r) CHECK(shuffle[perm[r]] == r);
}

TEST_CASE("msid examples and invariances") {
  Matrix s(2, 1), e(2, 1);
  s << 0.5, 0.5;
  e << 0.9, 0.1;
  const double expect = 0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1);
  CHECK(std::abs(expect - 0.5108256237659907) < 1e-12);
  CHECK(std::abs(msid(EndmemberMatrix(s), EndmemberMatrix(e)) - expect) < 1e-9);

  std::mt19937_64 rng(15);
  const auto S = random_endmembers(10, 3, rng);
  CHECK(std::abs(msid(S, S)) < 1e-12);
  CHECK(std::abs(msid(S, EndmemberMatrix(3.7 * S.data()))) < 1e-12);
  const auto T = random_endmembers(10, 3, rng);
  Vector scale(3);
  scale << 0.5, 4.0, 1.3;
  CHECK(msid(EndmemberMatrix(S.data() * scale.asDiagonal()), T) == doctest::Approx(msid(S, T)).epsilon(1e-12));
}

TEST_CASE("psnr examples") {
  Matrix ref = Matrix::Zero(1, 100);
  Matrix rec = Matrix::Zero(1, 100);
  rec(0, 0) = 1.0;  // MAX = 1, MSE = 0.01
  CHECK(std::abs(psnr(ref, rec) - 20.0) < 1e-9);
  CHECK(std::isinf(psnr(rec, rec)));
  CHECK(psnr(rec, rec) > 0);

  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix a(3, 20), b(3, 20);
  for (Index k = 0; k < a.size(); ++k) {
    a.data()[k] = u(rng);
    b.data()[k] = u(rng);
  }
  CHECK(psnr(2.0 * a, 2.0 * b) == doctest::Approx(psnr(a, b)).epsilon(1e-12));
  CHECK_THROWS_AS(psnr(a, Matrix::Zero(3, 19)), DimensionError);
}

TEST_CASE("evaluate_unmixing aligns endmembers before scoring abundances") {
  std::mt19937_64 rng(17);
  const auto S = random_endmembers(8, 3, rng);
  const AbundanceMatrix A(oracle::random_simplex(3, 12, rng));
  const std::vector<Index> shuffle{2, 0, 1};
  // Estimated column c holds true endmember shuffle[c], and abundance row c follows it.
  Matrix A_est(3, 12);
  for (Index c = 0; c < 3; ++c) A_est.row(c) = A.data().row(shuffle[c]);
  const Matrix Y = S.data() * A.data();
  const auto m = evaluate_unmixing(Y, AbundanceMatrix(A_est), S.permuted_columns(shuffle), &A, &S);
  CHECK(*m.rmse < 1e-14);
  CHECK(*m.msad < 1e-7);
  CHECK(std::abs(*m.msid) < 1e-12);
  CHECK(m.psnr > 250.0);
}

TEST_CASE("fmx header and payload") {
  Matrix m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  std::stringstream ss;
  fmx::write(ss, m);
  const std::string bytes = ss.str();
  const std::string header = R"({"rows":2,"cols":3,"order":"col-major","dtype":"f64"})";
  REQUIRE(bytes.size() == header.size() + 1 + 6 * sizeof(double));
  CHECK(bytes.substr(0, header.size() + 1) == header + "\n");
  double second;
  std::memcpy(&second, bytes.data() + header.size() + 1 + sizeof(double), sizeof(double));
  CHECK(second == 4.0);  // column-major: (1,0) follows (0,0)

  const Matrix back = fmx::read(ss);
  CHECK(back == m);
}

TEST_CASE("fmx round trip is bitwise for random matrices") {
  std::mt19937_64 rng(18);
  std::uniform_int_distribution<int> dim(0, 9);
  std::normal_distribution<double> n(0.0, 1e3);
  for (int trial = 0; trial < 25; ++trial) {
    Matrix m(dim(rng), dim(rng));
    for (Index k = 0; k < m.size(); ++k) m.data()[k] = n(rng);
    std::stringstream ss;
    fmx::write(ss, m);
    const Matrix back = fmx::read(ss);
    REQUIRE(back.rows() == m.rows());
    REQUIRE(back.cols() == m.cols());
    CHECK(std::memcmp(back.data(), m.data(), sizeof(double) * m.size()) == 0);
  }
}

TEST_CASE("fmx rejects malformed input") {
  {
    std::stringstream ss("not json\n");
    CHECK_THROWS_AS(fmx::read(ss), ParseError);
  }
  {
    std::stringstream ss(R"({"rows":2,"cols":2,"order":"row-major","dtype":"f64"})"
                         "\n");
    CHECK_THROWS_AS(fmx::read(ss), ParseError);
  }
  {
    std::stringstream ss(R"({"rows":2,"cols":2,"order":"col-major","dtype":"f64"})"
                         "\nshort");
    CHECK_THROWS_AS(fmx::read(ss), ParseError);
  }
}
