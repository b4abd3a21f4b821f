#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "tproj/numerics.hpp"

using namespace tproj;

TEST_CASE("expm matches a Taylor series across norms") {
  std::mt19937 rng(7);
  for (double scale : {0.01, 0.5, 3.0, 12.0}) {
    Matrix a = oracle::random_matrix(rng, 6, 6, scale / std::sqrt(6.0));
    CHECK(oracle::rel_err(expm(a), oracle::taylor_expm(a)) < 1e-11);
  }
}

TEST_CASE("expm of a rotation generator") {
  Matrix a(2, 2);
  a << 0.0, 1.3, -1.3, 0.0;
  Matrix e = expm(a);
  CHECK(e(0, 0) == doctest::Approx(std::cos(1.3)).epsilon(1e-14));
  CHECK(e(0, 1) == doctest::Approx(std::sin(1.3)).epsilon(1e-14));
  CHECK(e(1, 0) == doctest::Approx(-std::sin(1.3)).epsilon(1e-14));
}

TEST_CASE("expm rejects bad input") {
  Matrix nan = Matrix::Identity(2, 2);
  nan(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(expm(nan), Error);
  try {
    expm(Matrix::Identity(3, 3) * 2000.0);
    FAIL("overflow not reported");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::numerics);
  }
  CHECK_THROWS_AS(expm(Matrix::Zero(2, 3)), Error);
}

TEST_CASE("eigenvalue magnitudes of a companion matrix") {
  std::vector<std::complex<double>> roots{{0.5, 0.0}, {-0.3, 0.0}, {0.2, 0.4}, {0.2, -0.4}, {-1.5, 0.0}};
  EigenSummary s = eig_magnitudes(oracle::companion(roots));
  std::vector<double> expect{1.5, 0.5, std::hypot(0.2, 0.4), std::hypot(0.2, 0.4), 0.3};
  REQUIRE(s.magnitudes.size() == expect.size());
  for (size_t i = 0; i < expect.size(); ++i) CHECK(s.magnitudes[i] == doctest::Approx(expect[i]).epsilon(1e-10));
  CHECK(s.spectral_radius == doctest::Approx(1.5));
}

TEST_CASE("DARE agrees with the finite-horizon Riccati recursion") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    Matrix A = oracle::random_matrix(rng, 4, 4, 0.8);
    Matrix B = oracle::random_matrix(rng, 4, 2);
    Matrix q = oracle::random_matrix(rng, 4, 4);
    Matrix Q = q * q.transpose() + Matrix::Identity(4, 4);
    Matrix R = Matrix::Identity(2, 2) * 0.5;
    DareSolution s = solve_dare(A, B, Q, R);
    Matrix P = oracle::riccati_iterate(A, B, Q, R, Matrix::Zero(4, 2), 2000);
    CHECK(oracle::rel_err(s.P, P) < 1e-8);
    Matrix K = (R + B.transpose() * P * B).ldlt().solve(B.transpose() * P * A);
    CHECK(oracle::rel_err(s.K, K) < 1e-8);
    CHECK(s.spectral_radius < 1.0);
  }
}

TEST_CASE("DARE with a cross term") {
  std::mt19937 rng(12);
  Matrix A = oracle::random_matrix(rng, 3, 3, 0.9);
  Matrix B = oracle::random_matrix(rng, 3, 2);
  Matrix Q = Matrix::Identity(3, 3) * 2.0;
  Matrix R = Matrix::Identity(2, 2);
  Matrix N = oracle::random_matrix(rng, 3, 2, 0.2);
  DareSolution s = solve_dare(A, B, Q, R, N);
  Matrix P = oracle::riccati_iterate(A, B, Q, R, N, 2000);
  CHECK(oracle::rel_err(s.P, P) < 1e-8);
  Matrix K = (R + B.transpose() * P * B).ldlt().solve(B.transpose() * P * A + N.transpose());
  CHECK(oracle::rel_err(s.K, K) < 1e-8);
}

TEST_CASE("scalar DARE matches the quadratic root") {
  const double a = std::exp(1.0), b = std::exp(1.0) - 1.0, q = 1.0, r = 1.0;
  Matrix A(1, 1), B(1, 1), Q(1, 1), R(1, 1);
  A << a;
  B << b;
  Q << q;
  R << r;
  DareSolution s = solve_dare(A, B, Q, R);
  double lin = r * (1.0 - a * a) - q * b * b;
  double P = (-lin + std::sqrt(lin * lin + 4.0 * b * b * q * r)) / (2.0 * b * b);
  CHECK(s.P(0, 0) == doctest::Approx(P).epsilon(1e-12));
  CHECK(s.K(0, 0) == doctest::Approx(a * b * P / (r + b * b * P)).epsilon(1e-12));
}

TEST_CASE("DARE reports uncontrollable unstable modes") {
  Matrix A(1, 1), B(1, 1), Q(1, 1), R(1, 1);
  A << 2.0;
  B << 0.0;
  Q << 1.0;
  R << 1.0;
  CHECK_THROWS_AS(solve_dare(A, B, Q, R), Error);
}

TEST_CASE("linear solve and conditioning") {
  std::mt19937 rng(3);
  Matrix M = oracle::random_matrix(rng, 5, 5) + 5.0 * Matrix::Identity(5, 5);
  Matrix x = oracle::random_matrix(rng, 5, 2);
  LinearSolution s = solve_linear(M, M * x);
  CHECK(oracle::rel_err(s.x, x) < 1e-13);
  CHECK(s.conditioning > 0.0);
  Matrix singular = Matrix::Ones(3, 3);
  CHECK_THROWS_AS(solve_linear(singular, Matrix::Ones(3, 1)), Error);
}

TEST_CASE("symmetrize") {
  Matrix m(2, 2);
  m << 1, 2, 4, 3;
  Matrix s = symmetrize(m);
  CHECK(s(0, 1) == 3.0);
  CHECK(s(1, 0) == 3.0);
}
