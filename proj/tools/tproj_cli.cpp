// Batch front-end: every command writes CSV files with '#' provenance lines.
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tproj/csv.hpp"
#include "tproj/error.hpp"
#include "tproj/foot_placement.hpp"
#include "tproj/scalar_demo.hpp"
#include "tproj/simulation.hpp"
#include "tproj/viability.hpp"
#include "tproj/walking_model.hpp"

namespace {

using namespace tproj;

constexpr const char* kOutputEnv = "TPROJ_OUTPUT_DIR";

constexpr int kExitConfig = 2;
constexpr int kExitSynthesis = 3;
constexpr int kExitFell = 4;

struct Common {
  std::string params_path;
  double frequency = 0.0;  // 0 keeps the file value
  double mu = -0.4;
  bool auto_mu = false;
  std::string mu_criterion = "fraction";
  std::string out_dir;
};

// Lines of `key = value` that make up the config echo.
class Echo {
public:
  template <class T>
  Echo& add(const std::string& key, const T& value) {
    std::ostringstream os;
    os << key << " = " << value;
    lines_.push_back(os.str());
    return *this;
  }
  Echo& add(const std::string& key, double value) {
    lines_.push_back(key + " = " + format_number(value));
    return *this;
  }
  std::string header(const std::string& command, const RobotParams* params) const {
    std::string text = std::string("tproj artifact version ") + kArtifactVersion + "\ncommand = " + command + "\n";
    if (params) text += format_robot_params(*params);
    for (const auto& l : lines_) text += l + "\n";
    return comment_block(text);
  }

private:
  std::vector<std::string> lines_;
};

std::string output_dir(const Common& c) {
  if (!c.out_dir.empty()) return c.out_dir;
  if (const char* env = std::getenv(kOutputEnv); env && *env) return env;
  return ".";
}

std::string output_path(const Common& c, const std::string& name) {
  std::filesystem::path dir(output_dir(c));
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::invalid_argument, "cannot create output directory " + dir.string());
  return (dir / name).string();
}

RobotParams robot(const Common& c) {
  RobotParams p = c.params_path.empty() ? RobotParams{} : load_robot_params(c.params_path);
  if (c.frequency != 0.0) p = p.with_frequency(c.frequency);
  p.validate();
  return p;
}

MuCriterion criterion(const std::string& name) {
  if (name == "fraction") return MuCriterion::stabilization_fraction;
  if (name == "eigen") return MuCriterion::equal_eigenvalues;
  throw Error(ErrorCode::invalid_argument, "unknown mu criterion '" + name + "' (fraction|eigen)");
}

double resolve_mu(const Common& c, const RobotParams& p, Echo& echo) {
  if (!c.auto_mu) {
    echo.add("mu", c.mu);
    return c.mu;
  }
  MuTuning t = tune_mu(p, p.step_frequency, criterion(c.mu_criterion));
  echo.add("mu", t.mu).add("mu_criterion", c.mu_criterion).add("mu_achieved", t.achieved)
      .add("mu_attained", t.attained ? "yes" : "no");
  if (!t.attained)
    std::cerr << "warning: mu criterion '" << c.mu_criterion << "' not attained in [" << kMuLow << ", " << kMuHigh
              << "], using mu = " << t.mu << " (achieved " << t.achieved << ")\n";
  return t.mu;
}

Eigen::Vector2d parse_pair(const std::string& s, const std::string& what) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::invalid_argument, what + ": bad number '" + item + "'");
    }
  }
  if (v.size() != 2) throw Error(ErrorCode::invalid_argument, what + ": expected two comma-separated values");
  return {v[0], v[1]};
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::invalid_argument, what + ": bad number '" + item + "'");
    }
  }
  return v;
}

int state_index(const std::string& name) {
  static const char* names[] = {"swing_x", "swing_y", "pelvis_x", "pelvis_y",
                                "swing_vx", "swing_vy", "pelvis_vx", "pelvis_vy"};
  for (int i = 0; i < state::size; ++i)
    if (name == names[i]) return i;
  throw Error(ErrorCode::invalid_argument, "unknown state coordinate '" + name + "'");
}

void add_common(CLI::App* app, Common& c, bool with_gain) {
  app->add_option("--params", c.params_path, "robot parameter file (key = value)")->check(CLI::ExistingFile);
  app->add_option("--frequency", c.frequency, "step frequency override [steps/s]")->check(CLI::PositiveNumber);
  app->add_option("--out", c.out_dir, std::string("output directory (default $") + kOutputEnv + " or .)");
  if (with_gain) {
    app->add_option("--mu", c.mu, "input-cost exponent")->check(CLI::Range(-8.0, 8.0));
    app->add_flag("--auto-mu", c.auto_mu, "tune mu instead of using --mu");
    app->add_option("--mu-criterion", c.mu_criterion, "auto-mu rule: fraction|eigen");
  }
}

// --- commands ---

struct ScalarOpts {
  double period = 1.0, q = 1.0, r = 1.0;
  ScalarPulse pulse;
};

int cmd_scalar(const Common& c, const ScalarOpts& o) {
  if (!(o.period > 0) || !(o.r > 0) || !(o.q >= 0))
    throw Error(ErrorCode::invalid_argument, "scalar-demo needs T > 0, R > 0, Q >= 0");
  if (!(o.pulse.start >= 0 && o.pulse.start < o.pulse.end && o.pulse.end <= 1.0))
    throw Error(ErrorCode::invalid_argument, "pulse window must satisfy 0 <= start < end <= 1");
  ScalarComparison s = scalar_comparison(o.period, o.q, o.r, o.pulse);
  Echo echo;
  echo.add("period", o.period).add("q", o.q).add("r", o.r).add("pulse_start", o.pulse.start)
      .add("pulse_end", o.pulse.end).add("pulse_magnitude", o.pulse.magnitude);
  const auto& a = s.analysis;
  std::cout << "discrete_gain " << format_number(a.gain) << "\n"
            << "bound_lower " << format_number(a.lower) << "\n"
            << "bound_upper " << format_number(a.upper) << "\n"
            << "continuous_gain " << format_number(a.continuous_gain) << "\n"
            << "peak_continuous " << format_number(s.peak_continuous) << "\n"
            << "peak_dlqr " << format_number(s.peak_dlqr) << "\n"
            << "peak_time_projection " << format_number(s.peak_projection) << "\n"
            << "peak_open_loop " << format_number(s.peak_open_loop) << "\n"
            << "open_loop_unbounded " << (s.open_loop_unbounded ? "yes" : "no") << "\n"
            << "projection_rms_vs_continuous " << format_number(s.projection_rms_error) << "\n";
  write_text_file(output_path(c, "scalar_demo.csv"), scalar_csv(s, echo.header("scalar-demo", nullptr)));
  return 0;
}

int cmd_gains(const Common& c, int grid) {
  if (grid < 2) throw Error(ErrorCode::invalid_argument, "--grid must be >= 2");
  RobotParams p = robot(c);
  Echo echo;
  echo.add("grid", grid);
  double mu = resolve_mu(c, p, echo);
  WalkingModel m = build_3lp(p);
  ConstrainedDlqrGain g = design_walking_gain(m, mu);
  GainTable t = compute_gain_table(m, g, mu, grid);
  std::cout << "mu " << format_number(mu) << "\n"
            << "settle_fraction " << format_number(settle_fraction(t)) << "\n"
            << "k_e1_end " << format_number(t.k_e1.back()) << "\n"
            << "k_e2_end " << format_number(t.k_e2.back()) << "\n";
  write_text_file(output_path(c, "gains.csv"), gain_table_csv(t, echo.header("gains", &p)));
  return 0;
}

struct SimOpts {
  std::string controller = "time-projection";
  double speed = 1.0;
  int steps = 10;
  double dt = 1e-3;
  std::vector<std::string> pushes;
  std::string initial;
  double torque_limit = 0.0;
  double reach_ratio = 0.0;
  double threshold = 10.0;
  bool lateral_oscillation = false;
  double step_width = 0.0;
};

DisturbanceEvent parse_push(const std::string& s) {
  std::vector<double> v = parse_list(s, "--push");
  if (v.size() != 4 && v.size() != 5)
    throw Error(ErrorCode::invalid_argument, "--push expects fx,fy,start,end[,phase] (phase fractions)");
  DisturbanceEvent e;
  e.force = {v[0], v[1]};
  e.start = v[2];
  e.end = v[3];
  e.phase_relative = true;
  e.phase = v.size() == 5 ? static_cast<int>(v[4]) : 0;
  if (v.size() == 5 && (v[4] < 0 || v[4] != static_cast<double>(e.phase)))
    throw Error(ErrorCode::invalid_argument, "--push phase must be a non-negative integer");
  return e;
}

int cmd_simulate(const Common& c, const SimOpts& o) {
  RobotParams p = robot(c);
  Scenario sc;
  sc.controller = parse_controller(o.controller);
  sc.steps = o.steps;
  sc.dt = o.dt;
  sc.divergence_threshold = o.threshold;
  for (const auto& s : o.pushes) sc.events.push_back(parse_push(s));
  if (!o.initial.empty()) {
    std::vector<double> v = parse_list(o.initial, "--initial-error");
    if (v.size() != state::size) throw Error(ErrorCode::invalid_argument, "--initial-error needs 8 values");
    sc.initial_error = Eigen::Map<const Vector>(v.data(), state::size);
  }
  if (o.torque_limit > 0) sc.saturation.torque_limit = o.torque_limit;
  if (o.reach_ratio > 0) sc.saturation.reach_limit = o.reach_ratio * p.leg_length;
  if (o.step_width != 0.0 && !o.lateral_oscillation)
    throw Error(ErrorCode::invalid_argument, "--step-width requires --lateral-oscillation");
  sc.validate(p.period());

  Echo echo;
  echo.add("controller", o.controller).add("speed", o.speed).add("steps", o.steps).add("dt", o.dt)
      .add("threshold", o.threshold).add("lateral_oscillation", o.lateral_oscillation ? "yes" : "no")
      .add("step_width", o.step_width).add("initial_error", o.initial.empty() ? "0" : o.initial);
  for (const auto& s : o.pushes) echo.add("push", s);
  if (o.torque_limit > 0) echo.add("torque_limit", o.torque_limit);
  if (o.reach_ratio > 0) echo.add("reach_ratio", o.reach_ratio);
  double mu = resolve_mu(c, p, echo);

  WalkingModel m = build_3lp(p, o.lateral_oscillation);
  NominalGait nom = nominal_gait(m, o.speed, o.lateral_oscillation, o.step_width);
  ConstrainedDlqrGain g = design_walking_gain(m, mu);
  Trajectory tr = simulate(m, nom, g, sc);
  std::string head = echo.header("simulate", &p);
  write_text_file(output_path(c, "trajectory.csv"), trajectory_csv(tr, head));
  write_text_file(output_path(c, "touchdowns.csv"), touchdown_csv(tr, head));
  std::cout << "summed_error " << format_number(tr.summed_error(static_cast<int>(tr.steps.size()))) << "\n"
            << "fallen " << (tr.fallen ? "yes" : "no") << "\n";
  if (tr.fallen) {
    std::cerr << "tproj-error fell: normalized error exceeded " << format_number(o.threshold) << " at t = "
              << format_number(tr.fallen_time) << "\n";
    return kExitFell;
  }
  return 0;
}

struct SweepOpts {
  std::string force = "150,0";
  double speed = 1.0;
  double step_pct = 10.0;
};

int cmd_sweep(const Common& c, const SweepOpts& o) {
  RobotParams p = robot(c);
  Eigen::Vector2d force = parse_pair(o.force, "--force");
  if (!(o.step_pct > 0 && o.step_pct <= 50))
    throw Error(ErrorCode::invalid_argument, "--grid-step must be in (0, 50] percent");
  std::vector<double> starts, ends;
  const int n = static_cast<int>(std::lround(100.0 / o.step_pct));
  if (std::abs(n * o.step_pct - 100.0) > 1e-9) throw Error(ErrorCode::invalid_argument, "--grid-step must divide 100");
  for (int i = 0; i < n; ++i) starts.push_back(i * o.step_pct);
  for (int i = 1; i <= n; ++i) ends.push_back(i * o.step_pct);
  Echo echo;
  echo.add("force", o.force).add("speed", o.speed).add("grid_step_pct", o.step_pct);
  double mu = resolve_mu(c, p, echo);
  WalkingModel m = build_3lp(p);
  NominalGait nom = nominal_gait(m, o.speed);
  ConstrainedDlqrGain g = design_walking_gain(m, mu);
  ClosedLoopSimulator sim(m, nom, g);
  auto surfaces = timing_sensitivity(sim, force, starts, ends,
                                     {Controller::open_loop, Controller::dlqr, Controller::time_projection});
  std::string head = echo.header("sweep-timing", &p);
  for (const auto& s : surfaces) {
    std::string name = std::string("surface_") + controller_name(s.controller) + ".csv";
    write_text_file(output_path(c, name), surface_csv(s, head));
    std::cout << "wrote " << name << " (" << s.cells.size() << " cells)\n";
  }
  return 0;
}

struct ViabilityOpts {
  ViabilityConfig cfg;
  std::string coord_x = "pelvis_vx", coord_y = "pelvis_vy";
  double speed = 0.0;
};

int cmd_viability(const Common& c, ViabilityOpts o) {
  RobotParams p = robot(c);
  o.cfg.coord_x = state_index(o.coord_x);
  o.cfg.coord_y = state_index(o.coord_y);
  o.cfg.validate();
  Echo echo;
  echo.add("coord_x", o.coord_x).add("coord_y", o.coord_y).add("range_x", o.cfg.range_x)
      .add("range_y", o.cfg.range_y).add("resolution", o.cfg.resolution).add("steps", o.cfg.steps)
      .add("sub_phases", o.cfg.sub_phases).add("torque_limit", o.cfg.torque_limit)
      .add("reach_ratio", o.cfg.reach_ratio).add("epsilon", o.cfg.epsilon).add("speed", o.speed)
      .add("touchdown_rest", o.cfg.touchdown_rest ? "yes" : "no")
      .add("reach_every_sub_phase", o.cfg.reach_every_sub_phase ? "yes" : "no");
  double mu = resolve_mu(c, p, echo);
  WalkingModel m = build_3lp(p);
  NominalGait nom = nominal_gait(m, o.speed);
  ConstrainedDlqrGain g = design_walking_gain(m, mu);
  ViabilityGrid grid = viability(m, g, nom.X, nom.U, o.cfg);
  write_text_file(output_path(c, "viability.csv"), viability_csv(grid, echo.header("viability", &p)));
  std::cout << "tp_viable " << grid.tp_count << "\n"
            << "max_viable " << grid.max_count << "\n"
            << "coverage " << format_number(grid.coverage()) << "\n"
            << "nesting_violations " << grid.nesting_violations << "\n"
            << "undetermined " << grid.undetermined << "\n"
            << "certificate_failures " << grid.certificate_failures << "\n";
  return 0;
}

struct NominalOpts {
  double speed = 1.0;
  bool lateral_oscillation = false;
  double step_width = 0.0;
  int samples = 101;
};

int cmd_nominal(const Common& c, const NominalOpts& o) {
  RobotParams p = robot(c);
  if (o.samples < 2) throw Error(ErrorCode::invalid_argument, "--samples must be >= 2");
  if (o.step_width != 0.0 && !o.lateral_oscillation)
    throw Error(ErrorCode::invalid_argument, "--step-width requires --lateral-oscillation");
  Echo echo;
  echo.add("speed", o.speed).add("lateral_oscillation", o.lateral_oscillation ? "yes" : "no")
      .add("step_width", o.step_width).add("samples", o.samples);
  WalkingModel m = build_3lp(p, o.lateral_oscillation);
  NominalGait nom = nominal_gait(m, o.speed, o.lateral_oscillation, o.step_width);
  std::ostringstream os;
  os << echo.header("nominal", &p);
  os << "# params = " << csv_row(std::vector<double>(nom.U.data(), nom.U.data() + nom.U.size()));
  os << "t,swing_x,swing_y,pelvis_x,pelvis_y,swing_vx,swing_vy,pelvis_vx,pelvis_vy,u_sag,u_lat\n";
  const double T = m.period();
  for (int i = 0; i < o.samples; ++i) {
    double t = T * i / (o.samples - 1);
    Vector x = nom.state_at(m, t);
    Vector u = InputProfile{ProfileKind::linear, nom.U, T}.at(t);
    std::vector<double> row{t};
    row.insert(row.end(), x.data(), x.data() + x.size());
    row.insert(row.end(), u.data(), u.data() + u.size());
    os << csv_row(row);
  }
  write_text_file(output_path(c, "nominal.csv"), os.str());
  std::cout << "period " << format_number(T) << "\n";
  return 0;
}

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::invalid_argument: return kExitConfig;
    default: return kExitSynthesis;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-projection control for hybrid linear walking models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kArtifactVersion);

  Common common;
  ScalarOpts scalar;
  int gain_grid = kDefaultGainGrid;
  SimOpts sim;
  SweepOpts sweep;
  ViabilityOpts via;
  NominalOpts nominal;

  auto* s = app.add_subcommand("scalar-demo", "scalar plant: DLQR vs time projection vs continuous gain");
  s->add_option("--period", scalar.period, "phase length T [s]");
  s->add_option("--q", scalar.q, "state cost");
  s->add_option("--r", scalar.r, "input cost");
  s->add_option("--pulse-start", scalar.pulse.start, "pulse start, fraction of T");
  s->add_option("--pulse-end", scalar.pulse.end, "pulse end, fraction of T");
  s->add_option("--pulse-magnitude", scalar.pulse.magnitude, "pulse magnitude");
  s->add_option("--out", common.out_dir, std::string("output directory (default $") + kOutputEnv + " or .)");

  auto* g = app.add_subcommand("gains", "foot-placement gain table");
  add_common(g, common, true);
  g->add_option("--grid", gain_grid, "number of table times over the phase");

  auto* sm = app.add_subcommand("simulate", "closed-loop walking simulation");
  add_common(sm, common, true);
  sm->add_option("--controller", sim.controller, "open-loop|dlqr|time-projection|capture-point");
  sm->add_option("--speed", sim.speed, "nominal speed [m/s]");
  sm->add_option("--steps", sim.steps, "number of phases");
  sm->add_option("--dt", sim.dt, "control tick [s]");
  sm->add_option("--push", sim.pushes, "fx,fy,start,end[,phase]: pelvis force [N] over a phase-fraction window");
  sm->add_option("--initial-error", sim.initial, "8 comma-separated phase-start errors");
  sm->add_option("--torque-limit", sim.torque_limit, "hip torque limit [N m] (0 = none)");
  sm->add_option("--reach-ratio", sim.reach_ratio, "footstep bound as a fraction of leg length (0 = none)");
  sm->add_option("--threshold", sim.threshold, "normalized error that counts as a fall");
  sm->add_flag("--lateral-oscillation", sim.lateral_oscillation, "mirrored lateral frame with lateral sway");
  sm->add_option("--step-width", sim.step_width, "nominal step width [m] (with --lateral-oscillation)");

  auto* sw = app.add_subcommand("sweep-timing", "push timing sensitivity surfaces");
  add_common(sw, common, true);
  sw->add_option("--force", sweep.force, "fx,fy pelvis force [N]");
  sw->add_option("--speed", sweep.speed, "nominal speed [m/s]");
  sw->add_option("--grid-step", sweep.step_pct, "grid spacing in percent of the phase");

  auto* v = app.add_subcommand("viability", "viable-set slice for time projection and any controller");
  add_common(v, common, true);
  v->add_option("--coord-x", via.coord_x, "swept error coordinate (e.g. pelvis_vx)");
  v->add_option("--coord-y", via.coord_y, "swept error coordinate (e.g. pelvis_vy)");
  v->add_option("--range-x", via.cfg.range_x, "half width of the x range");
  v->add_option("--range-y", via.cfg.range_y, "half width of the y range");
  v->add_option("--resolution", via.cfg.resolution, "cells per axis");
  v->add_option("--steps", via.cfg.steps, "step budget");
  v->add_option("--sub-phases", via.cfg.sub_phases, "input updates per phase");
  v->add_option("--torque-limit", via.cfg.torque_limit, "hip torque limit [N m]");
  v->add_option("--reach-ratio", via.cfg.reach_ratio, "footstep bound as a fraction of leg length");
  v->add_option("--epsilon", via.cfg.epsilon, "capture tolerance (normalized)");
  v->add_option("--speed", via.speed, "nominal speed [m/s]");
  v->add_flag("!--free-touchdown", via.cfg.touchdown_rest, "allow a moving swing foot at touchdown");
  v->add_flag("--reach-every-sub-phase", via.cfg.reach_every_sub_phase, "apply the footstep bound at every sub-phase end");

  auto* n = app.add_subcommand("nominal", "nominal periodic gait over one phase");
  add_common(n, common, false);
  n->add_option("--speed", nominal.speed, "nominal speed [m/s]");
  n->add_flag("--lateral-oscillation", nominal.lateral_oscillation, "mirrored lateral frame with lateral sway");
  n->add_option("--step-width", nominal.step_width, "nominal step width [m]");
  n->add_option("--samples", nominal.samples, "samples over the phase");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << "tproj-error invalid_argument: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (*s) return cmd_scalar(common, scalar);
    if (*g) return cmd_gains(common, gain_grid);
    if (*sm) return cmd_simulate(common, sim);
    if (*sw) return cmd_sweep(common, sweep);
    if (*v) return cmd_viability(common, via);
    if (*n) return cmd_nominal(common, nominal);
  } catch (const Error& e) {
    std::cerr << "tproj-error " << error_code_name(e.code()) << ": " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "tproj-error internal: " << e.what() << "\n";
    return kExitSynthesis;
  }
  return kExitConfig;
}
