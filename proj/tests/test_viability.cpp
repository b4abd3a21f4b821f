#include <doctest.h>

#include "tproj/lp.hpp"
#include "tproj/viability.hpp"

using namespace tproj;

TEST_CASE("phase-one LP on small problems") {
  // x + y = 1, x - y <= 0.2, 0 <= x, y <= 1
  LpProblem p;
  p.A_eq = Matrix(1, 2);
  p.A_eq << 1, 1;
  p.b_eq = Vector::Constant(1, 1.0);
  p.A_ub = Matrix(1, 2);
  p.A_ub << 1, -1;
  p.b_ub = Vector::Constant(1, 0.2);
  p.lower = Vector::Zero(2);
  p.upper = Vector::Ones(2);
  LpResult r = find_feasible_point(p);
  REQUIRE(r.status == LpStatus::feasible);
  CHECK(r.x.sum() == doctest::Approx(1.0));
  CHECK(r.x(0) - r.x(1) <= 0.2 + 1e-9);
  CHECK((r.x.array() >= -1e-12).all());
  CHECK((r.x.array() <= 1.0 + 1e-12).all());

  p.b_ub(0) = -1.5;  // x - y <= -1.5 is out of the box
  CHECK(find_feasible_point(p).status == LpStatus::infeasible);

  // negative right-hand sides and shifted bounds
  LpProblem q;
  q.A_eq = Matrix(0, 3);
  q.b_eq = Vector(0);
  q.A_ub = Matrix(2, 3);
  q.A_ub << -1, -1, -1, 1, 0, 0;
  q.b_ub = Vector(2);
  q.b_ub << -2.5, -1.0;
  q.lower = Vector::Constant(3, -2.0);
  q.upper = Vector::Constant(3, 2.0);
  LpResult s = find_feasible_point(q);
  REQUIRE(s.status == LpStatus::feasible);
  CHECK(s.x.sum() >= 2.5 - 1e-9);
  CHECK(s.x(0) <= -1.0 + 1e-9);
}

TEST_CASE("LP reports the iteration cap") {
  LpProblem p;
  p.A_eq = Matrix::Ones(1, 4);
  p.b_eq = Vector::Constant(1, 2.0);
  p.A_ub = Matrix(0, 4);
  p.b_ub = Vector(0);
  p.lower = Vector::Zero(4);
  p.upper = Vector::Ones(4);
  CHECK(find_feasible_point(p, 0).status == LpStatus::iteration_limit);
}

namespace {

struct Fixture {
  WalkingModel model = build_3lp(RobotParams{}.with_frequency(1.5));
  ConstrainedDlqrGain gain = design_walking_gain(model, -0.4);
  NominalGait nominal = nominal_gait(model, 0.0);
};

}  // namespace

TEST_CASE_FIXTURE(Fixture, "axis problems reproduce the full model") {
  AxisProblem p = axis_problem(model, gain, nominal.X, nominal.U, Axis::lateral, 5);
  REQUIRE(p.projection.size() == 5);
  REQUIRE(p.nominal.size() == 6);
  // five sub-phase windows chain to the full-phase transition of the lateral block
  Matrix chain = Matrix::Identity(4, 4);
  for (int i = 0; i < 5; ++i) chain = p.transition * chain;
  DiscreteMap full = discretize(model.phase.dynamics, model.period(), ProfileKind::linear);
  auto ix = WalkingModel::axis_states(Axis::lateral);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(chain(i, j) == doctest::Approx(full.A(ix[i], ix[j])).epsilon(1e-10));
  CHECK(p.nominal_torque(0.0) == doctest::Approx(nominal.U(1)));
}

TEST_CASE_FIXTURE(Fixture, "zero error is viable for both") {
  ViabilityConfig cfg;
  cfg.resolution = 3;  // includes the origin
  ViabilityGrid g = viability(model, gain, nominal.X, nominal.U, cfg);
  CHECK(g.at(1, 1) == ViabilityLabel::tp_viable);
  CHECK(g.nesting_violations == 0);
  CHECK(g.certificate_failures == 0);
}

TEST_CASE_FIXTURE(Fixture, "nesting and horizon monotonicity") {
  ViabilityConfig cfg;
  cfg.resolution = 9;
  cfg.range_x = cfg.range_y = 1.5;
  ViabilityGrid six = viability(model, gain, nominal.X, nominal.U, cfg);
  cfg.steps = 3;
  ViabilityGrid three = viability(model, gain, nominal.X, nominal.U, cfg);
  CHECK(six.nesting_violations == 0);
  CHECK(three.nesting_violations == 0);
  CHECK(six.undetermined == 0);
  CHECK(six.certificate_failures == 0);
  for (size_t i = 0; i < six.labels.size(); ++i) {
    bool max3 = three.labels[i] == ViabilityLabel::tp_viable || three.labels[i] == ViabilityLabel::max_only;
    bool max6 = six.labels[i] == ViabilityLabel::tp_viable || six.labels[i] == ViabilityLabel::max_only;
    if (max3) CHECK(max6);
    if (three.labels[i] == ViabilityLabel::tp_viable) CHECK(six.labels[i] == ViabilityLabel::tp_viable);
  }
  CHECK(six.max_count >= six.tp_count);
  CHECK(six.tp_count > 0);
}

TEST_CASE_FIXTURE(Fixture, "extra constraints only shrink the max set") {
  ViabilityConfig cfg;
  cfg.resolution = 7;
  cfg.touchdown_rest = false;
  ViabilityGrid loose = viability(model, gain, nominal.X, nominal.U, cfg);
  cfg.touchdown_rest = true;
  cfg.reach_every_sub_phase = true;
  ViabilityGrid strict = viability(model, gain, nominal.X, nominal.U, cfg);
  CHECK(strict.max_count <= loose.max_count);
  CHECK(strict.nesting_violations == 0);
  CHECK(loose.nesting_violations == 0);
}

TEST_CASE_FIXTURE(Fixture, "tight torque limits shrink the sets") {
  ViabilityConfig cfg;
  cfg.resolution = 7;
  ViabilityGrid wide = viability(model, gain, nominal.X, nominal.U, cfg);
  cfg.torque_limit = 40.0;
  ViabilityGrid tight = viability(model, gain, nominal.X, nominal.U, cfg);
  CHECK(tight.max_count <= wide.max_count);
  CHECK(tight.tp_count <= wide.tp_count);
}

TEST_CASE_FIXTURE(Fixture, "config validation and export") {
  ViabilityConfig bad;
  bad.coord_x = bad.coord_y = state::pelvis_vx;
  CHECK_THROWS_AS(bad.validate(), Error);
  ViabilityConfig cfg;
  cfg.resolution = 2;
  CHECK(cfg.cell_value(0, 1.0) == -1.0);
  CHECK(cfg.cell_value(1, 1.0) == 1.0);
  ViabilityGrid g = viability(model, gain, nominal.X, nominal.U, cfg);
  std::string csv = viability_csv(g);
  CHECK(csv.find("\ncell_x,cell_y,label\n") != std::string::npos);
  CHECK(std::string(viability_label_name(ViabilityLabel::max_only)) == "max_only");
}
