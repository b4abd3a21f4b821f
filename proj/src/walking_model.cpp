#include "tproj/walking_model.hpp"

#include "tproj/csv.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace tproj {

namespace {
// massless legs make the swing input map infinite; keep a trace of mass
constexpr double kLegMassFloor = 1e-9;
}  // namespace

double RobotParams::torso_height() const {
  double phi = leg_mass_fraction;
  return (com_height - 2.0 * phi * leg_mass_height_fraction * leg_length) / (1.0 - 2.0 * phi);
}

void RobotParams::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::invalid_argument, "RobotParams: " + what); };
  if (!(total_mass > 0) || !std::isfinite(total_mass)) bad("total_mass_kg must be positive");
  if (!(leg_length > 0) || !std::isfinite(leg_length)) bad("leg_length_m must be positive");
  if (!(com_height > 0) || !std::isfinite(com_height)) bad("com_height_m must be positive");
  if (!(com_height <= leg_length)) bad("com_height_m must not exceed leg_length_m");
  if (!(leg_mass_fraction >= 0 && leg_mass_fraction < 0.5)) bad("leg_mass_fraction must be in [0, 0.5)");
  if (!(leg_mass_height_fraction > 0 && leg_mass_height_fraction < 1))
    bad("leg_mass_height_fraction must be in (0, 1)");
  if (!(gravity > 0) || !std::isfinite(gravity)) bad("gravity must be positive");
  if (!(step_frequency > 0) || !std::isfinite(step_frequency)) bad("step_frequency_hz must be positive");
  if (!(torso_height() > 0)) bad("leg masses sit above the CoM height; torso height would be non-positive");
}

RobotParams RobotParams::scaled(double c) const {
  RobotParams p = *this;
  p.leg_length *= c;
  p.com_height *= c;
  p.total_mass *= c * c * c;
  p.step_frequency /= std::sqrt(c);
  return p;
}

RobotParams RobotParams::with_leg_mass_fraction(double fraction) const {
  RobotParams p = *this;
  double zt = torso_height();
  p.leg_mass_fraction = fraction;
  p.com_height = (1.0 - 2.0 * fraction) * zt + 2.0 * fraction * leg_mass_height_fraction * leg_length;
  return p;
}

RobotParams RobotParams::with_frequency(double f) const {
  RobotParams p = *this;
  p.step_frequency = f;
  return p;
}

namespace {

const std::map<std::string, double RobotParams::*>& param_keys() {
  static const std::map<std::string, double RobotParams::*> keys{
      {"total_mass_kg", &RobotParams::total_mass},
      {"leg_length_m", &RobotParams::leg_length},
      {"com_height_m", &RobotParams::com_height},
      {"leg_mass_fraction", &RobotParams::leg_mass_fraction},
      {"leg_mass_height_fraction", &RobotParams::leg_mass_height_fraction},
      {"gravity", &RobotParams::gravity},
      {"step_frequency_hz", &RobotParams::step_frequency},
  };
  return keys;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

RobotParams parse_robot_params(const std::string& text, RobotParams base) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::invalid_argument, "params line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    auto it = param_keys().find(key);
    if (it == param_keys().end())
      throw Error(ErrorCode::invalid_argument, "params line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    try {
      size_t used = 0;
      double v = std::stod(val, &used);
      if (used != val.size()) throw std::invalid_argument(val);
      base.*(it->second) = v;
    } catch (const std::exception&) {
      throw Error(ErrorCode::invalid_argument,
                  "params line " + std::to_string(lineno) + ": '" + val + "' is not a number");
    }
  }
  base.validate();
  return base;
}

RobotParams load_robot_params(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::invalid_argument, "cannot open parameter file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_robot_params(ss.str());
}

std::string format_robot_params(const RobotParams& p, const std::string& prefix) {
  std::ostringstream os;
  os << prefix << "total_mass_kg = " << format_number(p.total_mass) << '\n'
     << prefix << "leg_length_m = " << format_number(p.leg_length) << '\n'
     << prefix << "com_height_m = " << format_number(p.com_height) << '\n'
     << prefix << "leg_mass_fraction = " << format_number(p.leg_mass_fraction) << '\n'
     << prefix << "leg_mass_height_fraction = " << format_number(p.leg_mass_height_fraction) << '\n'
     << prefix << "gravity = " << format_number(p.gravity) << '\n'
     << prefix << "step_frequency_hz = " << format_number(p.step_frequency) << '\n';
  return os.str();
}

std::array<int, 4> WalkingModel::axis_states(Axis axis) {
  int k = static_cast<int>(axis);
  return {state::swing_x + k, state::pelvis_x + k, state::swing_vx + k, state::pelvis_vx + k};
}

std::array<int, 2> WalkingModel::axis_params(Axis axis) {
  int k = static_cast<int>(axis);
  return {k, 2 + k};
}

Vector WalkingModel::state_scale() const {
  Vector s(state::size);
  s.head(4).setConstant(1.0 / params.leg_length);
  s.tail(4).setConstant(1.0 / std::sqrt(params.gravity * params.leg_length));
  return s;
}

double WalkingModel::normalized_norm(const Vector& error) const {
  return error.cwiseProduct(state_scale()).norm();
}

Matrix switch_block() {
  Matrix s(2, 2);
  s << -1, 0, -1, 1;
  return s;
}

WalkingModel build_3lp(const RobotParams& params, bool lateral_mirrored) {
  params.validate();
  const double g = params.gravity, l = params.leg_length, rho = params.leg_mass_height_fraction;
  const double M = params.total_mass;
  const double phi = std::max(params.leg_mass_fraction, kLegMassFloor);
  const double mt = M * (1.0 - 2.0 * phi);
  const double ml = M * phi;
  const double zt = (params.com_height - 2.0 * phi * rho * l) / (1.0 - 2.0 * phi);

  // Per axis, with s the swing foot and p the pelvis relative to the stance
  // foot. The swing-leg mass sits at (1-rho) s + rho p and pivots at the hip,
  // the hip torque acts between pelvis and swing leg. Moments about the
  // stance foot give the pelvis equation.
  const double inertia = mt * zt + ml * rho * rho * l;
  const double leg_s = -g / l, leg_p = g / l, leg_u = 1.0 / (ml * (1.0 - rho) * l);
  const double p_s = (g * ml * (1.0 - rho) - ml * rho * l * leg_s) / inertia;
  const double p_p = (g * (mt + 2.0 * ml * rho) - ml * rho * l * leg_p) / inertia;
  const double p_u = -ml * rho * l * leg_u / inertia;
  const double p_f = l / inertia;
  const double s_s = (leg_s - rho * p_s) / (1.0 - rho);
  const double s_p = (leg_p - rho * p_p) / (1.0 - rho);
  const double s_u = (leg_u - rho * p_u) / (1.0 - rho);
  const double s_f = -rho * p_f / (1.0 - rho);

  Matrix a = Matrix::Zero(8, 8), b = Matrix::Zero(8, 2), bw = Matrix::Zero(8, 2);
  for (Axis axis : {Axis::sagittal, Axis::lateral}) {
    auto ix = WalkingModel::axis_states(axis);
    int k = static_cast<int>(axis);
    a(ix[0], ix[2]) = 1.0;
    a(ix[1], ix[3]) = 1.0;
    a(ix[2], ix[0]) = s_s;
    a(ix[2], ix[1]) = s_p;
    a(ix[3], ix[0]) = p_s;
    a(ix[3], ix[1]) = p_p;
    b(ix[2], k) = s_u;
    b(ix[3], k) = p_u;
    bw(ix[2], k) = s_f;
    bw(ix[3], k) = p_f;
  }

  WalkingModel m;
  m.params = params;
  m.lateral_mirrored = lateral_mirrored;
  m.phase.dynamics = LtiModel(a, b, bw,
                              {"swing_x", "swing_y", "pelvis_x", "pelvis_y", "swing_vx", "swing_vy",
                               "pelvis_vx", "pelvis_vy"});
  m.phase.period = params.period();
  m.phase.profile = ProfileKind::linear;

  Matrix S = Matrix::Zero(8, 8);
  const Matrix s = switch_block();
  for (Axis axis : {Axis::sagittal, Axis::lateral}) {
    auto ix = WalkingModel::axis_states(axis);
    double sign = (axis == Axis::lateral && lateral_mirrored) ? -1.0 : 1.0;
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) {
        S(ix[r], ix[c]) = sign * s(r, c);
        S(ix[2 + r], ix[2 + c]) = sign * s(r, c);
      }
  }
  m.phase.switch_matrix = S;
  m.phase.constraint = Matrix::Zero(2, 8);
  m.phase.constraint(0, state::swing_vx) = 1.0;
  m.phase.constraint(1, state::swing_vy) = 1.0;
  return m;
}

CostDesign walking_cost(const WalkingModel& model, double mu) {
  const RobotParams& p = model.params;
  return normalized_cost(4, model.phase.parameters(), p.leg_length, p.gravity, p.total_mass, mu);
}

ConstrainedDlqrGain design_walking_gain(const WalkingModel& model, double mu) {
  DiscreteMap d = model.phase.step_map();
  return design_constrained(d.A, d.B, model.phase.constraint, walking_cost(model, mu));
}

double lateral_sign(const WalkingModel& model, Side stance) {
  if (!model.lateral_mirrored) return 1.0;
  // the lateral frame axis points from the stance foot toward the swing side
  return stance == Side::left ? -1.0 : 1.0;
}

WorldPose world_pose(const WalkingModel& model, const GaitState& s) {
  Eigen::Vector2d d(1.0, lateral_sign(model, s.stance));
  WorldPose w;
  w.stance = s.anchor;
  w.swing = s.anchor + d.cwiseProduct(s.x.segment<2>(state::swing_x));
  w.pelvis = s.anchor + d.cwiseProduct(s.x.segment<2>(state::pelvis_x));
  w.swing_velocity = d.cwiseProduct(s.x.segment<2>(state::swing_vx));
  w.pelvis_velocity = d.cwiseProduct(s.x.segment<2>(state::pelvis_vx));
  return w;
}

GaitState switch_legs(const WalkingModel& model, const GaitState& s) {
  GaitState out;
  out.anchor = world_pose(model, s).swing;
  out.x = model.phase.switch_matrix * s.x;
  out.stance = s.stance == Side::left ? Side::right : Side::left;
  out.phase_clock = 0.0;
  return out;
}

Vector NominalGait::state_at(const WalkingModel& model, double t) const {
  if (t <= 0.0) return X;
  DiscreteMap d = discretize_window(model.phase.dynamics, 0.0, t, model.phase.profile, model.period());
  return d.A * X + d.B * U;
}

NominalGait nominal_gait(const WalkingModel& model, double speed, bool lateral_oscillation,
                         double step_width) {
  if (!std::isfinite(speed) || !std::isfinite(step_width))
    throw Error(ErrorCode::invalid_argument, "nominal_gait: non-finite speed or width");
  if (lateral_oscillation && !model.lateral_mirrored)
    throw Error(ErrorCode::invalid_argument,
                "nominal_gait: lateral oscillation needs a model built with a mirrored lateral frame");
  const double T = model.period();
  DiscreteMap d = discretize(model.phase.dynamics, T, model.phase.profile, T);
  const Matrix& S = model.phase.switch_matrix;
  const Eigen::Index n = 8, k = model.phase.parameters();
  const int rows = 8 + 2 + 1 + (lateral_oscillation ? 1 : 0);
  Matrix sys = Matrix::Zero(rows, n + k);
  Vector rhs = Vector::Zero(rows);
  sys.block(0, 0, n, n) = S * d.A - Matrix::Identity(n, n);
  sys.block(0, n, n, k) = S * d.B;
  sys.block(8, 0, 2, n) = model.phase.constraint * S * d.A;
  sys.block(8, n, 2, k) = model.phase.constraint * S * d.B;
  sys.block(10, 0, 1, n) = d.A.row(state::swing_x);
  sys.block(10, n, 1, k) = d.B.row(state::swing_x);
  rhs(10) = speed * T;
  if (lateral_oscillation) {
    sys.block(11, 0, 1, n) = d.A.row(state::swing_y);
    sys.block(11, n, 1, k) = d.B.row(state::swing_y);
    rhs(11) = step_width;
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(sys);
  Vector z = cod.solve(rhs);
  double residual = (sys * z - rhs).norm();
  if (!(residual <= 1e-9 * std::max(1.0, rhs.norm())))
    throw Error(ErrorCode::infeasible,
                "nominal_gait: periodicity system has no solution (residual " + std::to_string(residual) + ")");
  NominalGait g;
  g.X = z.head(n);
  g.U = z.tail(k);
  g.speed = speed;
  g.step_width = lateral_oscillation ? step_width : 0.0;
  g.lateral_oscillation = lateral_oscillation;
  return g;
}

CaptureGains capture_gains(const RobotParams& params) {
  params.validate();
  return CaptureGains{1.0, std::sqrt(params.com_height / params.gravity)};
}

}  // namespace tproj
