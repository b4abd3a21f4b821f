#include "tproj/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tproj/csv.hpp"
#include "tproj/parallel.hpp"
#include "tproj/projection.hpp"

namespace tproj {

const char* controller_name(Controller c) {
  switch (c) {
    case Controller::open_loop: return "open-loop";
    case Controller::dlqr: return "dlqr";
    case Controller::time_projection: return "time-projection";
    case Controller::capture_point: return "capture-point";
  }
  return "?";
}

Controller parse_controller(const std::string& name) {
  for (Controller c : {Controller::open_loop, Controller::dlqr, Controller::time_projection, Controller::capture_point})
    if (name == controller_name(c)) return c;
  throw Error(ErrorCode::invalid_argument, "unknown controller '" + name +
                                               "' (open-loop, dlqr, time-projection, capture-point)");
}

void Scenario::validate(double period) const {
  auto bad = [](const std::string& w) { throw Error(ErrorCode::invalid_argument, "scenario: " + w); };
  if (steps < 1) bad("steps must be >= 1");
  if (!(dt > 0.0) || dt > period) bad("dt must be in (0, T]");
  double n = period / dt;
  if (std::abs(n - std::round(n)) > 1e-6 * n) bad("dt must divide the step period");
  if (initial_error.size() != state::size || !initial_error.allFinite()) bad("initial error must be a finite 8-vector");
  if (!persistent_force.allFinite()) bad("persistent force must be finite");
  if (!(divergence_threshold > 0.0)) bad("divergence threshold must be positive");
  if (!(saturation.torque_limit > 0.0) || !(saturation.reach_limit > 0.0)) bad("saturation limits must be positive");
  const double horizon = steps * period;
  for (const auto& ev : events) {
    double a = ev.start_time(period), b = ev.end_time(period);
    if (!ev.force.allFinite()) bad("event force must be finite");
    if (!(b >= a)) bad("event ends before it starts");
    if (a < 0.0 || b > horizon + 1e-12) bad("event outside the simulated horizon");
  }
}

double Trajectory::summed_error(int n) const {
  double s = 0.0;
  for (const auto& st : steps)
    if (st.step <= n) s += st.err_norm;
  if (fallen && static_cast<int>(steps.size()) < n) return std::numeric_limits<double>::infinity();
  return s;
}

ClosedLoopSimulator::ClosedLoopSimulator(const WalkingModel& model, const NominalGait& nominal,
                                         const ConstrainedDlqrGain& gain, double dt)
    : model_(model), nominal_(nominal), gain_(gain) {
  const double T = model.period();
  if (!(dt > 0.0 && dt <= T)) throw Error(ErrorCode::invalid_argument, "simulator: dt must be in (0, T]");
  if (nominal.lateral_oscillation != model.lateral_mirrored && nominal.lateral_oscillation)
    throw Error(ErrorCode::invalid_argument, "simulator: nominal gait and model frames differ");
  ticks_ = static_cast<int>(std::lround(T / dt));
  if (std::abs(ticks_ * dt - T) > 1e-6 * T)
    throw Error(ErrorCode::invalid_argument, "simulator: dt must divide the step period");
  dt_ = T / ticks_;
  tick_maps_ = window_maps(model.phase.dynamics, dt_);
  const double clamp = clamp_projection_time(T, T);
  last_update_ = 0;
  while (last_update_ + 1 < ticks_ && (last_update_ + 1) * dt_ <= clamp + 1e-12) ++last_update_;

  tp_.resize(static_cast<size_t>(ticks_));
  rem_.resize(static_cast<size_t>(ticks_));
  nominal_states_.resize(static_cast<size_t>(ticks_));
  parallel_for(static_cast<size_t>(ticks_), [&](size_t j) {
    double t = static_cast<double>(j) * dt_;
    if (static_cast<int>(j) <= last_update_) tp_[j] = constrained_projection_gain(model_.phase, gain_, t);
    DiscreteMap r = discretize_window(model_.phase.dynamics, t, T, model_.phase.profile, T);
    rem_[j] = TickMaps{r.A, r.B};
    nominal_states_[j] = nominal_.state_at(model_, t);
  });
  for (int j = last_update_ + 1; j < ticks_; ++j) tp_[static_cast<size_t>(j)] = tp_[static_cast<size_t>(last_update_)];
  nominal_end_ = nominal_.state_at(model_, T);
  capture_velocity_ = capture_gains(model_.params).velocity;
}

Vector ClosedLoopSimulator::correction(Controller c, int j, const Vector& e, const Vector& held,
                                       bool fresh_phase) const {
  const Eigen::Index k = model_.phase.parameters();
  switch (c) {
    case Controller::open_loop:
      return Vector::Zero(k);
    case Controller::dlqr:
      return fresh_phase ? Vector(gain_.assembled * e) : held;
    case Controller::time_projection:
      return j <= last_update_ ? Vector(tp_[static_cast<size_t>(j)] * e) : held;
    case Controller::capture_point: {
      if (j > last_update_) return held;
      // land on the instantaneous capture point with a stationary swing foot
      const TickMaps& r = rem_[static_cast<size_t>(j)];
      const int rows[4] = {state::swing_x, state::swing_y, state::swing_vx, state::swing_vy};
      Matrix M(4, k);
      Vector rhs(4);
      for (int i = 0; i < 4; ++i) {
        M.row(i) = r.rem_B.row(rows[i]);
        rhs(i) = -r.rem_A.row(rows[i]).dot(e);
      }
      for (int a = 0; a < 2; ++a)
        rhs(a) += e(state::pelvis_x + a) + capture_velocity_ * e(state::pelvis_vx + a);
      return solve_linear(M, rhs, 1e-14).x;
    }
  }
  return Vector::Zero(k);
}

Vector ClosedLoopSimulator::saturate(const Vector& dU, const Vector& e, int j, const Saturation& s) const {
  Vector out = dU;
  if (std::isfinite(s.reach_limit)) {
    const TickMaps& r = rem_[static_cast<size_t>(j)];
    Vector end = nominal_end_ + r.rem_A * e + r.rem_B * out;
    for (Axis axis : {Axis::sagittal, Axis::lateral}) {
      int a = static_cast<int>(axis);
      double reach = end(state::swing_x + a) - end(state::pelvis_x + a);
      if (std::abs(reach) <= s.reach_limit) continue;
      // re-aim this axis at the reach boundary, still landing with zero swing velocity
      auto p = WalkingModel::axis_params(axis);
      Matrix M(2, 2);
      Vector rhs(2);
      Vector base = nominal_end_ + r.rem_A * e + r.rem_B * out;
      for (int c = 0; c < 2; ++c) {
        M(0, c) = r.rem_B(state::swing_x + a, p[c]) - r.rem_B(state::pelvis_x + a, p[c]);
        M(1, c) = r.rem_B(state::swing_vx + a, p[c]);
      }
      rhs(0) = std::copysign(s.reach_limit, reach) - reach;
      rhs(1) = -base(state::swing_vx + a);
      try {
        Vector delta = solve_linear(M, rhs, 1e-12).x;
        out(p[0]) += delta(0);
        out(p[1]) += delta(1);
      } catch (const Error&) {
        // too close to touchdown to steer; keep the command
      }
    }
  }
  if (std::isfinite(s.torque_limit)) {
    Vector total = nominal_.U + out;
    total = total.cwiseMax(-s.torque_limit).cwiseMin(s.torque_limit);
    out = total - nominal_.U;
  }
  return out;
}

Trajectory ClosedLoopSimulator::run(const Scenario& sc) const {
  const double T = model_.period();
  sc.validate(T);
  if (std::lround(T / sc.dt) != ticks_)
    throw Error(ErrorCode::invalid_argument, "scenario dt differs from the simulator tick");
  const LtiModel& dyn = model_.phase.dynamics;
  const ProfileKind kind = model_.phase.profile;

  // global breakpoints where the applied force changes
  std::vector<double> cuts;
  for (const auto& ev : sc.events) {
    cuts.push_back(ev.start_time(T));
    cuts.push_back(ev.end_time(T));
  }
  std::sort(cuts.begin(), cuts.end());
  auto force_at = [&](double t) {
    Eigen::Vector2d f = sc.persistent_force;
    for (const auto& ev : sc.events)
      if (t >= ev.start_time(T) && t < ev.end_time(T)) f += ev.force;
    return f;
  };

  Trajectory traj;
  GaitState gs;
  gs.x = nominal_.X + sc.initial_error;
  Vector e = sc.initial_error;
  Vector held = Vector::Zero(model_.phase.parameters());

  for (int k = 0; k < sc.steps; ++k) {
    const double t_phase0 = k * T;
    for (int j = 0; j < ticks_; ++j) {
      const double t0 = t_phase0 + j * dt_;
      const double t1 = t_phase0 + (j + 1) * dt_;
      Vector dU = saturate(correction(sc.controller, j, e, held, j == 0), e, j, sc.saturation);
      held = dU;
      const Eigen::Vector2d f0 = force_at(t0);

      if (sc.record_ticks) {
        gs.x = nominal_states_[static_cast<size_t>(j)] + e;
        WorldPose w = world_pose(model_, gs);
        InputProfile prof = InputProfile::linear((nominal_.U + dU).head(2), (nominal_.U + dU).tail(2), T);
        traj.ticks.push_back(TickRecord{t0, w.pelvis, w.swing, w.stance, w.pelvis_velocity, w.swing_velocity,
                                        prof.at(j * dt_), f0, model_.normalized_norm(e)});
      }

      // exact propagation, split where the force changes inside the tick
      std::vector<double> sub{t0};
      for (double c : cuts)
        if (c > t0 && c < t1) sub.push_back(c);
      sub.push_back(t1);
      if (sub.size() == 2) {
        e = tick_maps_.transition * e + tick_maps_.param_map(j * dt_, kind, T) * dU + tick_maps_.push * f0;
      } else {
        for (size_t i = 0; i + 1 < sub.size(); ++i) {
          WindowMaps w = window_maps(dyn, sub[i + 1] - sub[i]);
          e = w.transition * e + w.param_map(sub[i] - t_phase0, kind, T) * dU + w.push * force_at(sub[i]);
        }
      }

      if (!e.allFinite() || model_.normalized_norm(e) > sc.divergence_threshold) {
        traj.fallen = true;
        traj.fallen_time = t1;
        return traj;
      }
    }
    // touchdown
    gs.x = nominal_end_ + e;
    gs.phase_clock = T;
    GaitState next = switch_legs(model_, gs);
    e = model_.phase.switch_matrix * e;
    traj.steps.push_back(StepRecord{k + 1, model_.normalized_norm(e), next.anchor, e});
    gs = next;
  }
  return traj;
}

Trajectory simulate(const WalkingModel& model, const NominalGait& nominal, const ConstrainedDlqrGain& gain,
                    const Scenario& scenario) {
  scenario.validate(model.period());
  ClosedLoopSimulator sim(model, nominal, gain, scenario.dt);
  return sim.run(scenario);
}

std::string trajectory_csv(const Trajectory& traj, const std::string& provenance) {
  std::string out = provenance;
  if (traj.fallen) out += "# fallen_at_s = " + format_number(traj.fallen_time) + "\n";
  out += "t,pelvis_x,pelvis_y,swing_x,swing_y,stance_x,stance_y,u_sag,u_lat,fx,fy\n";
  for (const auto& r : traj.ticks)
    out += csv_row({r.t, r.pelvis.x(), r.pelvis.y(), r.swing.x(), r.swing.y(), r.stance.x(), r.stance.y(),
                    r.input.x(), r.input.y(), r.force.x(), r.force.y()});
  return out;
}

std::string touchdown_csv(const Trajectory& traj, const std::string& provenance) {
  std::string out = provenance;
  if (traj.fallen) out += "# fallen_at_s = " + format_number(traj.fallen_time) + "\n";
  out += "step,err_norm,foot_x,foot_y\n";
  for (const auto& s : traj.steps)
    out += csv_row({static_cast<double>(s.step), s.err_norm, s.foot.x(), s.foot.y()});
  return out;
}

std::vector<TimingSurface> timing_sensitivity(const ClosedLoopSimulator& sim, const Eigen::Vector2d& force,
                                              const std::vector<double>& start_pct,
                                              const std::vector<double>& end_pct,
                                              const std::vector<Controller>& controllers) {
  std::vector<std::pair<double, double>> cells;
  for (double a : start_pct)
    for (double b : end_pct)
      if (a < b) cells.emplace_back(a, b);
  for (auto [a, b] : cells)
    if (a < 0.0 || b > 100.0) throw Error(ErrorCode::invalid_argument, "timing grid must lie in [0, 100]%");
  std::vector<TimingSurface> out;
  for (Controller c : controllers) {
    TimingSurface s;
    s.controller = c;
    s.cells.resize(cells.size());
    parallel_for(cells.size(), [&](size_t i) {
      Scenario sc;
      sc.controller = c;
      sc.steps = 3;
      sc.dt = sim.tick();
      sc.record_ticks = false;
      sc.divergence_threshold = std::numeric_limits<double>::infinity();
      sc.events.push_back(DisturbanceEvent{force, cells[i].first / 100.0, cells[i].second / 100.0, true, 0});
      Trajectory t = sim.run(sc);
      TimingCell cell{cells[i].first, cells[i].second, {}};
      for (int k = 0; k < 3; ++k) cell.err[static_cast<size_t>(k)] = t.steps[static_cast<size_t>(k)].err_norm;
      s.cells[i] = cell;
    });
    out.push_back(std::move(s));
  }
  return out;
}

std::string surface_csv(const TimingSurface& s, const std::string& provenance) {
  std::string out = provenance;
  out += std::string("# controller = ") + controller_name(s.controller) + "\n";
  out += "start_pct,end_pct,err_step1,err_step2,err_step3\n";
  for (const auto& c : s.cells) out += csv_row({c.start_pct, c.end_pct, c.err[0], c.err[1], c.err[2]});
  return out;
}

}  // namespace tproj
