#include <doctest.h>

#include <cmath>

#include "tproj/csv.hpp"
#include "tproj/foot_placement.hpp"
#include "tproj/projection.hpp"

using namespace tproj;

namespace {

struct Fixture {
  WalkingModel model = build_3lp(RobotParams{});
  ConstrainedDlqrGain gain = design_walking_gain(model, -0.4);
  GainTable table = compute_gain_table(model, gain, -0.4, 101);
};

}  // namespace

TEST_CASE_FIXTURE(Fixture, "gain table endpoints show leg retraction") {
  REQUIRE(table.size() == 101);
  CHECK(table.times.front() == 0.0);
  CHECK(table.times.back() == doctest::Approx(model.period()));
  CHECK(table.k_e1.back() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(table.k_e2.back() == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(std::abs(table.k_de1.back()) < 1e-6);
  CHECK(std::abs(table.k_de2.back()) < 1e-6);
  CHECK(table.step_bound == doctest::Approx(0.8 * 0.9));
}

TEST_CASE_FIXTURE(Fixture, "table rows follow the projection map") {
  // footstep adjustment = predicted touchdown swing deviation minus current pelvis deviation
  const double T = model.period();
  const double t = table.times[30];
  Matrix L = constrained_projection_gain(model.phase, gain, t);
  DiscreteMap rem = discretize_window(model.phase.dynamics, t, T, ProfileKind::linear, T);
  Matrix row = rem.A + rem.B * L;
  CHECK(table.k_e1[30] == doctest::Approx(row(state::swing_x, state::swing_x)).epsilon(1e-9));
  CHECK(table.k_e2[30] == doctest::Approx(row(state::swing_x, state::pelvis_x) - 1.0).epsilon(1e-9));
  CHECK(table.k_de2[30] == doctest::Approx(row(state::swing_x, state::pelvis_vx)).epsilon(1e-9));
}

TEST_CASE_FIXTURE(Fixture, "interpolation and clamping") {
  auto mid = gains_at(table, 0.5 * (table.times[10] + table.times[11]));
  CHECK(mid[0] == doctest::Approx(0.5 * (table.k_e1[10] + table.k_e1[11])));
  auto end = gains_at(table, 10.0);
  CHECK(end[0] == doctest::Approx(table.k_e1.back()));

  ErrorFrame e;
  e.e2 = Eigen::Vector2d(0.01, -0.02);
  e.de2 = Eigen::Vector2d(0.05, 0.0);
  Eigen::Vector2d raw = raw_adjustment(table, 0.1, e);
  auto k = gains_at(table, 0.1);
  CHECK(raw.x() == doctest::Approx(k[2] * 0.01 + k[3] * 0.05));
  CHECK(raw.y() == doctest::Approx(k[2] * -0.02));
  e.de2 = Eigen::Vector2d(50.0, -50.0);
  Eigen::Vector2d cl = apply_gains(table, 0.1, e);
  CHECK(std::abs(cl.x()) == doctest::Approx(table.step_bound));
  CHECK(std::abs(cl.y()) == doctest::Approx(table.step_bound));

  Vector x = Vector::LinSpaced(8, 1.0, 8.0);
  CHECK(ErrorFrame::from_state(x).to_state().isApprox(x));
  CHECK(ErrorFrame::from_state(x).de2.x() == x(state::pelvis_vx));
}

TEST_CASE("settle fraction on a synthetic table") {
  GainTable t;
  for (int i = 0; i <= 10; ++i) {
    t.times.push_back(i * 0.1);
    t.k_e1.push_back(i >= 7 ? 1.0 : 0.0);
    t.k_de1.push_back(0.0);
    t.k_e2.push_back(0.0);
    t.k_de2.push_back(0.0);
  }
  t.period = 1.0;
  CHECK(settle_fraction(t) == doctest::Approx(0.3));
}

TEST_CASE("mu trades convergence against effort") {
  WalkingModel m = build_3lp(RobotParams{});
  double low = settle_fraction(compute_gain_table(m, design_walking_gain(m, -2.0), -2.0, 101));
  double high = settle_fraction(compute_gain_table(m, design_walking_gain(m, 3.0), 3.0, 101));
  CHECK(high > low);
}

TEST_CASE("mu tuning reports unattained targets") {
  MuTuning t = tune_mu(RobotParams{}, 2.0, MuCriterion::stabilization_fraction, 101);
  CHECK(t.mu >= kMuLow);
  CHECK(t.mu <= kMuHigh);
  if (!t.attained) CHECK(t.achieved < kTargetSettleFraction);
  MuTuning e = tune_mu(RobotParams{}, 2.0, MuCriterion::equal_eigenvalues, 51);
  CHECK(e.mu >= kMuLow);
  CHECK(e.mu <= kMuHigh);
}

TEST_CASE_FIXTURE(Fixture, "gain table export") {
  std::string csv = gain_table_csv(table);
  CHECK(csv.rfind("# ", 0) == 0);
  CHECK(csv.find("\nt,k_e1,k_de1,k_e2,k_de2\n") != std::string::npos);
  size_t rows = 0;
  for (char c : csv) rows += c == '\n';
  size_t comments = 0;
  for (size_t i = 0; i < csv.size(); ++i)
    if ((i == 0 || csv[i - 1] == '\n') && csv[i] == '#') ++comments;
  CHECK(rows == comments + 1 + table.size());
}
