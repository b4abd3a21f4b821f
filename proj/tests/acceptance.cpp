// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include "oracles.hpp"
#include "tproj/foot_placement.hpp"
#include "tproj/projection.hpp"
#include "tproj/scalar_demo.hpp"
#include "tproj/simulation.hpp"
#include "tproj/viability.hpp"

using namespace tproj;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Outcome scalar_gains() {
  ScalarAnalysis s = analyze_scalar(1.0, 1.0, 1.0);
  const double e = std::exp(1.0);
  bool ok = std::abs(s.gain - 1.43) <= 0.01 && std::abs(s.upper - e / (e - 1.0)) <= 1e-4 &&
            std::abs(s.upper - 1.5820) <= 1e-4 && std::abs(s.continuous_gain - 2.37) <= 0.01;
  return {ok, fmt("discrete gain %.5f", s.gain) + fmt(", upper bound %.6f", s.upper) +
                  fmt(", continuous gain %.5f", s.continuous_gain)};
}

Outcome pulse_ordering() {
  ScalarComparison c = scalar_comparison(1.0, 1.0, 1.0);
  bool ok = c.open_loop_unbounded && c.peak_dlqr > c.peak_projection && c.projection_rms_error <= 0.15;
  return {ok, std::string("open-loop unbounded ") + (c.open_loop_unbounded ? "yes" : "no") +
                  fmt(", peak dlqr %.4f", c.peak_dlqr) + fmt(" > projection %.4f", c.peak_projection) +
                  fmt(", projection rms vs continuous %.4f", c.projection_rms_error)};
}

Outcome propagation_fidelity() {
  std::mt19937 rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    LtiModel m(oracle::random_matrix(rng, 8, 8, 1.0 / std::sqrt(8.0)), oracle::random_matrix(rng, 8, 2),
               oracle::random_matrix(rng, 8, 2));
    const double T = 0.5, t0 = 0.15, t1 = 0.3;
    Vector x0 = oracle::random_matrix(rng, 8, 1);
    Vector u0 = oracle::random_matrix(rng, 2, 1), u1 = oracle::random_matrix(rng, 2, 1);
    Vector w = oracle::random_matrix(rng, 2, 1);
    InputProfile prof = InputProfile::linear(u0, u1, T);
    PiecewiseConstant dist = PiecewiseConstant::pulse(w, t0, t1, T);
    auto quiet = [&](double t) { return Vector(m.b * prof.at(t)); };
    auto pushed = [&](double t) { return Vector(m.b * prof.at(t) + m.bw * w); };
    Vector ref = oracle::rk4(m.a, quiet, x0, 0.0, t0, 1e-5);
    ref = oracle::rk4(m.a, pushed, ref, t0, t1, 1e-5);
    ref = oracle::rk4(m.a, quiet, ref, t1, T, 1e-5);
    Vector got = propagate(m, x0, prof, dist, T);
    worst = std::max(worst, (got - ref).norm() / ref.norm());
  }
  return {worst <= 1e-8, fmt("worst relative error %.3e over 20 systems", worst)};
}

Outcome constrained_dlqr() {
  bool ok = true;
  std::string detail;
  for (double f : {1.5, 2.0, 3.0}) {
    WalkingModel m = build_3lp(RobotParams{}.with_frequency(f));
    ConstrainedDlqrGain g = design_walking_gain(m, -0.4);
    DiscreteMap step = m.phase.step_map();
    Matrix cl = step.A + step.B * g.assembled;
    std::mt19937 rng(static_cast<unsigned>(f * 100));
    double worst_c = 0.0, worst_end = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      Vector e = oracle::random_matrix(rng, 8, 1, 0.05);
      for (int k = 0; k < 50; ++k) {
        e = cl * e;
        worst_c = std::max(worst_c, (m.phase.constraint * e).norm());
      }
      worst_end = std::max(worst_end, m.normalized_norm(e));
    }
    ok = ok && worst_c <= 1e-9 && worst_end < 1e-6;
    detail += fmt("%.1f steps/s:", f) + fmt(" |C E| %.1e,", worst_c) + fmt(" final %.1e; ", worst_end);
  }
  // small instance against the brute-force QP
  Matrix A(2, 2), B(2, 2), C(1, 2);
  A << 1.2, 0.5, 0.1, 0.9;
  B << 1.0, 0.2, 0.3, 1.0;
  C << 1.0, -1.0;
  CostDesign d;
  d.Q = Matrix::Identity(2, 2);
  d.R = Matrix::Identity(2, 2) * 0.5;
  ConstrainedDlqrGain g = design_constrained(A, B, C, d);
  Vector x0 = g.basis.transpose();
  Vector qp = oracle::constrained_qp_first_input(A, B, C, d.Q, d.R, x0, 30);
  double gap = (g.assembled * x0 - qp).norm();
  ok = ok && gap <= 1e-6;
  detail += fmt("QP oracle gap %.1e", gap);
  return {ok, detail};
}

Outcome projection_consistency() {
  WalkingModel m = build_3lp(RobotParams{});
  ConstrainedDlqrGain g = design_walking_gain(m, -0.4);
  const double T = m.period();
  double at_zero = (constrained_projection_gain(m.phase, g, 0.0) - g.assembled).cwiseAbs().maxCoeff();
  std::mt19937 rng(5);
  double drift = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    Vector e0 = oracle::random_matrix(rng, 8, 1, 0.05);
    Vector u = g.assembled * e0;
    for (int i = 1; i < 20; ++i) {
      double t = T * i / 20.0;
      DiscreteMap part = discretize(m.phase.dynamics, t, ProfileKind::linear, T);
      Vector c = project_constrained(m.phase, g, t, part.A * e0 + part.B * u).correction;
      drift = std::max(drift, (c - u).cwiseAbs().maxCoeff());
    }
  }
  DiscreteMap zero = discretize_window(m.phase.dynamics, 0.0, 0.0, ProfileKind::linear, T);
  Matrix M = Matrix::Identity(4, 4) + g.assembled * solve_linear(zero.A, zero.B).x;
  EigenSummary ev = eig_magnitudes(M);
  double dev = 0.0;
  for (double v : ev.magnitudes) dev = std::max(dev, std::abs(v - 1.0));
  bool ok = at_zero <= 1e-9 && drift <= 1e-9 && dev <= 1e-10;
  return {ok, fmt("projection vs DLQR at t=0 %.1e", at_zero) + fmt(", undisturbed drift %.1e", drift) +
                  fmt(", |eig M(0)| - 1 max %.1e", dev)};
}

Outcome retraction_endpoints() {
  RobotParams p;
  MuTuning t = tune_mu(p, 2.0, MuCriterion::stabilization_fraction);
  WalkingModel m = build_3lp(p);
  GainTable tab = compute_gain_table(m, design_walking_gain(m, t.mu), t.mu);
  bool ok = std::abs(tab.k_e1.back() - 1.0) <= 1e-3 && std::abs(tab.k_e2.back() + 1.0) <= 1e-3;
  return {ok, fmt("tuned mu %.3f", t.mu) + (t.attained ? " (target met)" : " (target not met") +
                  (t.attained ? "" : fmt(", settle fraction %.3f)", t.achieved)) + fmt(", k_e1(T) %.6f", tab.k_e1.back()) +
                  fmt(", k_e2(T) %.6f", tab.k_e2.back())};
}

Outcome mass_trend() {
  std::vector<double> vals;
  std::string detail;
  for (double frac : {0.12, 0.16, 0.20}) {
    RobotParams p = RobotParams{}.with_leg_mass_fraction(frac);
    WalkingModel m = build_3lp(p);
    GainTable tab = compute_gain_table(m, design_walking_gain(m, -0.4), -0.4);
    vals.push_back(gains_at(tab, 0.1 * m.period())[0]);
    detail += fmt("leg fraction %.2f: ", frac) + fmt("k_e1(0.1T) %.4f; ", vals.back());
  }
  return {vals[0] < vals[1] && vals[1] < vals[2], detail};
}

Outcome push_reproduction() {
  WalkingModel m = build_3lp(RobotParams{});
  NominalGait nom = nominal_gait(m, 1.0);
  ClosedLoopSimulator sim(m, nom, design_walking_gain(m, -0.4));
  auto run = [&](Controller c, int steps) {
    Scenario sc;
    sc.controller = c;
    sc.steps = steps;
    sc.record_ticks = false;
    sc.events.push_back(DisturbanceEvent{Eigen::Vector2d(300.0, 0.0), 0.2, 0.8, true, 0});
    return sim.run(sc);
  };
  Trajectory open = run(Controller::open_loop, 10);
  Trajectory dlqr = run(Controller::dlqr, 4), tp = run(Controller::time_projection, 4);
  double ed = dlqr.summed_error(4), et = tp.summed_error(4);
  bool ok = open.fallen && !dlqr.fallen && !tp.fallen && et < ed;
  return {ok, std::string("open-loop fallen ") + (open.fallen ? "yes" : "no") + fmt(" (t=%.3f s)", open.fallen_time) +
                  fmt(", summed 4-step error dlqr %.4f", ed) + fmt(" vs time-projection %.4f", et)};
}

Outcome timing_surfaces() {
  WalkingModel m = build_3lp(RobotParams{});
  NominalGait nom = nominal_gait(m, 1.0);
  ClosedLoopSimulator sim(m, nom, design_walking_gain(m, -0.4));
  std::vector<double> starts, ends;
  for (int i = 0; i < 10; ++i) starts.push_back(10.0 * i);
  for (int i = 1; i <= 10; ++i) ends.push_back(10.0 * i);
  auto s = timing_sensitivity(sim, Eigen::Vector2d(150.0, 0.0), starts, ends,
                              {Controller::open_loop, Controller::dlqr, Controller::time_projection});
  const auto& open = s[0].cells;
  const auto& dlqr = s[1].cells;
  const auto& tp = s[2].cells;
  auto err1 = [](const std::vector<TimingCell>& cells, double a, double b) {
    for (const auto& c : cells)
      if (std::abs(c.start_pct - a) < 1e-9 && std::abs(c.end_pct - b) < 1e-9) return c.err[0];
    return std::nan("");
  };
  int mono_bad = 0, pairs = 0;
  for (const auto* cells : {&open, &dlqr})
    for (int dur = 10; dur < 100; dur += 10)
      for (int a = 0; a + dur + 10 <= 100; a += 10) {
        ++pairs;
        if (!(err1(*cells, a, a + dur) > err1(*cells, a + 10, a + 10 + dur))) ++mono_bad;
      }
  int better = 0;
  for (size_t i = 0; i < dlqr.size(); ++i)
    if (dlqr[i].err[1] > tp[i].err[1]) ++better;
  double frac = static_cast<double>(better) / static_cast<double>(dlqr.size());
  bool ok = mono_bad == 0 && frac >= 0.95;
  return {ok, fmt("monotonicity violations %.0f", mono_bad) + fmt(" of %.0f pairs", pairs) +
                  fmt(", dlqr step-2 > time-projection on %.1f%% of cells", 100.0 * frac)};
}

Outcome viability_sets() {
  auto grid_at = [](double f) {
    WalkingModel m = build_3lp(RobotParams{}.with_frequency(f));
    NominalGait nom = nominal_gait(m, 0.0);
    return viability(m, design_walking_gain(m, -0.4), nom.X, nom.U, ViabilityConfig{});
  };
  ViabilityGrid slow = grid_at(1.5), fast = grid_at(3.0);
  bool nest = slow.nesting_violations == 0 && fast.nesting_violations == 0;
  bool ok = nest && slow.coverage() >= 0.8 && slow.coverage() >= fast.coverage();
  return {ok, fmt("nesting violations %.0f", slow.nesting_violations + fast.nesting_violations) +
                  fmt(", coverage at 1.5 steps/s %.3f", slow.coverage()) + fmt(" (need >= 0.8), at 3 steps/s %.3f", fast.coverage()) +
                  fmt(", undetermined %.0f", slow.undetermined + fast.undetermined) +
                  fmt(", certificate failures %.0f", slow.certificate_failures + fast.certificate_failures)};
}

Outcome scaling_invariance() {
  RobotParams full;
  RobotParams half = full.scaled(0.5);
  auto table = [](const RobotParams& p) {
    WalkingModel m = build_3lp(p);
    return compute_gain_table(m, design_walking_gain(m, -0.4), -0.4);
  };
  GainTable a = table(full), b = table(half);
  const double ta = std::sqrt(full.leg_length / full.gravity), tb = std::sqrt(half.leg_length / half.gravity);
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a.times[i] / a.period - b.times[i] / b.period));
    worst = std::max(worst, std::abs(a.k_e1[i] - b.k_e1[i]));
    worst = std::max(worst, std::abs(a.k_e2[i] - b.k_e2[i]));
    worst = std::max(worst, std::abs(a.k_de1[i] / ta - b.k_de1[i] / tb));
    worst = std::max(worst, std::abs(a.k_de2[i] / ta - b.k_de2[i] / tb));
  }
  return {worst <= 1e-6, fmt("max normalized gain difference %.2e", worst)};
}

}  // namespace

int main() {
  struct Item {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const Item items[] = {
      {1, "scalar gains", scalar_gains},
      {2, "pulse response ordering", pulse_ordering},
      {3, "propagation fidelity", propagation_fidelity},
      {4, "constrained DLQR", constrained_dlqr},
      {5, "time-projection consistency", projection_consistency},
      {6, "leg-retraction endpoints", retraction_endpoints},
      {7, "leg-mass trend", mass_trend},
      {8, "push recovery comparison", push_reproduction},
      {9, "push timing surfaces", timing_surfaces},
      {10, "viability sets", viability_sets},
      {11, "scaling invariance", scaling_invariance},
  };
  int failed = 0;
  for (const auto& it : items) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %d (%s): %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", it.id, it.name, o.detail.c_str(),
                secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(items)) - failed, std::size(items));
  return failed == 0 ? 0 : 1;
}
