#include <doctest.h>

#include "oracles.hpp"
#include "tproj/lti.hpp"

using namespace tproj;

namespace {

LtiModel random_model(std::mt19937& rng, int n, int m, int d) {
  return LtiModel(oracle::random_matrix(rng, n, n, 1.0 / std::sqrt(n)), oracle::random_matrix(rng, n, m),
                  oracle::random_matrix(rng, n, d));
}

}  // namespace

TEST_CASE("discretization matches RK4 for both profiles") {
  std::mt19937 rng(21);
  LtiModel mdl = random_model(rng, 5, 2, 1);
  const double T = 0.7;
  Vector x0 = oracle::random_matrix(rng, 5, 1);
  Vector u0 = oracle::random_matrix(rng, 2, 1), u1 = oracle::random_matrix(rng, 2, 1);

  DiscreteMap dc = discretize(mdl, T, ProfileKind::constant);
  Vector ref_c = oracle::rk4(mdl.a, [&](double) { return Vector(mdl.b * u0); }, x0, 0.0, T, 1e-4);
  CHECK(oracle::rel_err(dc.A * x0 + dc.B * u0, ref_c) < 1e-10);

  DiscreteMap dl = discretize(mdl, T, ProfileKind::linear);
  Vector p(4);
  p << u0, u1;
  auto lin = [&](double t) { return Vector(mdl.b * (u0 * (1.0 - t / T) + u1 * t / T)); };
  Vector ref_l = oracle::rk4(mdl.a, lin, x0, 0.0, T, 1e-4);
  CHECK(oracle::rel_err(dl.A * x0 + dl.B * p, ref_l) < 1e-10);
}

TEST_CASE("windows compose into the full phase") {
  std::mt19937 rng(22);
  LtiModel mdl = random_model(rng, 4, 2, 0);
  const double T = 0.5, t0 = 0.17;
  DiscreteMap full = discretize(mdl, T, ProfileKind::linear);
  DiscreteMap first = discretize_window(mdl, 0.0, t0, ProfileKind::linear, T);
  DiscreteMap second = discretize_window(mdl, t0, T, ProfileKind::linear, T);
  CHECK(oracle::rel_err(second.A * first.A, full.A) < 1e-12);
  CHECK(oracle::rel_err(second.A * first.B + second.B, full.B) < 1e-12);
  CHECK(oracle::rel_err(first.B, discretize(mdl, t0, ProfileKind::linear, T).B) < 1e-12);
}

TEST_CASE("propagation under a pulse matches RK4") {
  std::mt19937 rng(23);
  LtiModel mdl = random_model(rng, 6, 2, 2);
  const double T = 0.6;
  Vector x0 = oracle::random_matrix(rng, 6, 1);
  Vector u0 = oracle::random_matrix(rng, 2, 1), u1 = oracle::random_matrix(rng, 2, 1);
  Vector w = oracle::random_matrix(rng, 2, 1);
  InputProfile prof = InputProfile::linear(u0, u1, T);
  PiecewiseConstant dist = PiecewiseConstant::pulse(w, 0.1, 0.35, T);
  // integrate piecewise so no RK4 step straddles a discontinuity
  auto quiet = [&](double t) { return Vector(mdl.b * prof.at(t)); };
  auto inside = [&](double t) { return Vector(mdl.b * prof.at(t) + mdl.bw * w); };
  Vector ref = oracle::rk4(mdl.a, quiet, x0, 0.05, 0.1, 1e-4);
  ref = oracle::rk4(mdl.a, inside, ref, 0.1, 0.35, 1e-4);
  ref = oracle::rk4(mdl.a, quiet, ref, 0.35, 0.55, 1e-4);
  Vector got = propagate(mdl, x0, prof, dist, 0.55, 0.05);
  CHECK(oracle::rel_err(got, ref) < 1e-10);
}

TEST_CASE("input profiles") {
  Vector a(2), b(2);
  a << 1.0, -2.0;
  b << 3.0, 4.0;
  InputProfile p = InputProfile::linear(a, b, 2.0);
  CHECK(p.inputs() == 2);
  CHECK(p.at(0.0).isApprox(a));
  CHECK(p.at(2.0).isApprox(b));
  CHECK(p.at(1.0).isApprox(0.5 * (a + b)));
  InputProfile c = InputProfile::constant(a);
  CHECK(c.at(1.7).isApprox(a));
  CHECK(parameter_count(ProfileKind::linear, 3) == 6);
  CHECK(parameter_count(ProfileKind::constant, 3) == 3);
}

TEST_CASE("piecewise-constant signals") {
  Vector v(1);
  v << 2.0;
  PiecewiseConstant p = PiecewiseConstant::pulse(v, 0.2, 0.4, 1.0);
  CHECK(p.at(0.1)(0) == 0.0);
  CHECK(p.at(0.2)(0) == 2.0);
  CHECK(p.at(0.39)(0) == 2.0);
  CHECK(p.at(0.4)(0) == 0.0);
  PiecewiseConstant bad;
  bad.breaks = {0.5, 0.1};
  bad.values = {v, v};
  bad.end = 1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("model validation") {
  CHECK_THROWS_AS(LtiModel(Matrix::Zero(2, 3), Matrix::Zero(2, 1)), Error);
  CHECK_THROWS_AS(LtiModel(Matrix::Zero(2, 2), Matrix::Zero(3, 1)), Error);
  LtiModel ok(Matrix::Zero(2, 2), Matrix::Zero(2, 1));
  CHECK(ok.disturbances() == 0);
}

TEST_CASE("phase step map applies the reset after the flow") {
  std::mt19937 rng(24);
  PhaseModel ph;
  ph.dynamics = random_model(rng, 4, 2, 0);
  ph.period = 0.4;
  ph.switch_matrix = oracle::random_matrix(rng, 4, 4);
  ph.constraint = Matrix::Zero(0, 4);
  DiscreteMap flow = discretize(ph.dynamics, ph.period, ProfileKind::linear);
  DiscreteMap step = ph.step_map();
  CHECK(oracle::rel_err(step.A, ph.switch_matrix * flow.A) < 1e-13);
  CHECK(oracle::rel_err(step.B, ph.switch_matrix * flow.B) < 1e-13);
}
