#include "tproj/lti.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tproj {

LtiModel::LtiModel(Matrix a_, Matrix b_, Matrix bw_, std::vector<std::string> labels_)
    : a(std::move(a_)), b(std::move(b_)), bw(std::move(bw_)), labels(std::move(labels_)) {
  if (bw.size() == 0) bw = Matrix::Zero(a.rows(), 0);
  validate();
}

void LtiModel::validate() const {
  require_square(a, "LtiModel.a");
  if (b.rows() != a.rows()) throw Error(ErrorCode::invalid_argument, "LtiModel: b row count != N");
  if (bw.rows() != a.rows()) throw Error(ErrorCode::invalid_argument, "LtiModel: bw row count != N");
  require_finite(a, "LtiModel.a");
  require_finite(b, "LtiModel.b");
  require_finite(bw, "LtiModel.bw");
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != a.rows())
    throw Error(ErrorCode::invalid_argument, "LtiModel: label count != N");
}

Eigen::Index parameter_count(ProfileKind kind, Eigen::Index inputs) {
  return kind == ProfileKind::constant ? inputs : 2 * inputs;
}

InputProfile InputProfile::constant(const Vector& u) {
  InputProfile p;
  p.kind = ProfileKind::constant;
  p.params = u;
  return p;
}

InputProfile InputProfile::linear(const Vector& start, const Vector& end, double period) {
  if (start.size() != end.size())
    throw Error(ErrorCode::invalid_argument, "InputProfile: endpoint size mismatch");
  if (!(period > 0.0)) throw Error(ErrorCode::invalid_argument, "InputProfile: period must be positive");
  InputProfile p;
  p.kind = ProfileKind::linear;
  p.params.resize(2 * start.size());
  p.params << start, end;
  p.period = period;
  return p;
}

Eigen::Index InputProfile::inputs() const {
  return kind == ProfileKind::constant ? params.size() : params.size() / 2;
}

Vector InputProfile::at(double t) const {
  if (kind == ProfileKind::constant) return params;
  const Eigen::Index m = inputs();
  double s = t / period;
  return (1.0 - s) * params.head(m) + s * params.tail(m);
}

WindowMaps window_maps(const LtiModel& model, double length) {
  if (!(length >= 0.0)) throw Error(ErrorCode::invalid_argument, "window_maps: negative length");
  const Eigen::Index n = model.states(), m = model.inputs(), d = model.disturbances();
  // state, input value, input slope, disturbance
  Matrix z = Matrix::Zero(n + 2 * m + d, n + 2 * m + d);
  z.block(0, 0, n, n) = model.a;
  z.block(0, n, n, m) = model.b;
  z.block(n, n + m, m, m) = Matrix::Identity(m, m);
  z.block(0, n + 2 * m, n, d) = model.bw;
  Matrix e = expm(z * length);
  WindowMaps w;
  w.length = length;
  w.transition = e.block(0, 0, n, n);
  w.ramp0 = e.block(0, n, n, m);
  w.ramp1 = e.block(0, n + m, n, m);
  w.push = e.block(0, n + 2 * m, n, d);
  return w;
}

Matrix WindowMaps::param_map(double t0, ProfileKind kind, double period) const {
  if (kind == ProfileKind::constant) return ramp0;
  // u(t0 + s) = u0 (1 - (t0 + s)/T) + u1 (t0 + s)/T
  const Eigen::Index n = ramp0.rows(), m = ramp0.cols();
  Matrix out(n, 2 * m);
  out.leftCols(m) = ramp0 * (1.0 - t0 / period) - ramp1 / period;
  out.rightCols(m) = ramp0 * (t0 / period) + ramp1 / period;
  return out;
}

DiscreteMap discretize_window(const LtiModel& model, double t0, double t1, ProfileKind kind,
                              double period) {
  if (!(t1 >= t0)) throw Error(ErrorCode::invalid_argument, "discretize_window: t1 < t0");
  if (kind == ProfileKind::linear && !(period > 0.0))
    throw Error(ErrorCode::invalid_argument, "discretize_window: period must be positive");
  WindowMaps w = window_maps(model, t1 - t0);
  return DiscreteMap{w.transition, w.param_map(t0, kind, period), t1 - t0};
}

DiscreteMap discretize(const LtiModel& model, double horizon, ProfileKind kind, double period) {
  if (!(horizon > 0.0)) throw Error(ErrorCode::invalid_argument, "discretize: horizon must be positive");
  return discretize_window(model, 0.0, horizon, kind, period > 0.0 ? period : horizon);
}

PiecewiseConstant PiecewiseConstant::zero(Eigen::Index dim, double end) {
  return PiecewiseConstant{{0.0}, {Vector::Zero(dim)}, end};
}

PiecewiseConstant PiecewiseConstant::pulse(const Vector& value, double t0, double t1, double end) {
  PiecewiseConstant s{{0.0}, {Vector::Zero(value.size())}, end};
  if (t1 <= t0) return s;
  if (t0 > 0.0) {
    s.breaks.push_back(t0);
    s.values.push_back(value);
  } else {
    s.values[0] = value;
  }
  s.breaks.push_back(t1);
  s.values.push_back(Vector::Zero(value.size()));
  return s;
}

Eigen::Index PiecewiseConstant::dim() const { return values.empty() ? 0 : values.front().size(); }

void PiecewiseConstant::validate() const {
  if (breaks.empty() || breaks.size() != values.size())
    throw Error(ErrorCode::invalid_argument, "disturbance: breaks and values must pair up");
  for (size_t i = 1; i < breaks.size(); ++i) {
    if (!(breaks[i] > breaks[i - 1]))
      throw Error(ErrorCode::invalid_argument, "disturbance: breaks must increase");
    if (values[i].size() != values[0].size())
      throw Error(ErrorCode::invalid_argument, "disturbance: value size mismatch");
  }
}

Vector PiecewiseConstant::at(double t) const {
  auto it = std::upper_bound(breaks.begin(), breaks.end(), t);
  if (it == breaks.begin()) return Vector::Zero(dim());
  return values[static_cast<size_t>(it - breaks.begin()) - 1];
}

Vector propagate(const LtiModel& model, const Vector& x0, const InputProfile& profile,
                 const PiecewiseConstant& disturbance, double t, double t_start) {
  if (x0.size() != model.states()) throw Error(ErrorCode::invalid_argument, "propagate: state size");
  if (profile.inputs() != model.inputs())
    throw Error(ErrorCode::invalid_argument, "propagate: profile input count");
  if (!(t >= t_start)) throw Error(ErrorCode::invalid_argument, "propagate: t before start");
  disturbance.validate();
  if (disturbance.dim() != model.disturbances())
    throw Error(ErrorCode::invalid_argument, "propagate: disturbance dimension");
  if (disturbance.breaks.front() > t_start || disturbance.end < t) {
    std::ostringstream os;
    os << "propagate: disturbance undefined on part of [" << t_start << ", " << t << "]";
    throw Error(ErrorCode::invalid_argument, os.str());
  }

  std::vector<double> cuts{t_start};
  for (double b : disturbance.breaks)
    if (b > t_start && b < t) cuts.push_back(b);
  cuts.push_back(t);

  Vector x = x0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    double s0 = cuts[i], s1 = cuts[i + 1];
    if (s1 <= s0) continue;
    WindowMaps w = window_maps(model, s1 - s0);
    x = w.transition * x + w.param_map(s0, profile.kind, profile.period) * profile.params;
    if (model.disturbances() > 0) x += w.push * disturbance.at(s0);
  }
  return x;
}

DiscreteMap PhaseModel::step_map() const {
  DiscreteMap d = discretize(dynamics, period, profile, period);
  d.A = switch_matrix * d.A;
  d.B = switch_matrix * d.B;
  return d;
}

}  // namespace tproj
