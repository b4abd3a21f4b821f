#include "tproj/projection.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tproj {

double clamp_projection_time(double t, double period) {
  return std::min(t, (1.0 - kRemainingTimeClamp) * period);
}

namespace {

void check_phase_time(double t, double period) {
  if (!(t >= 0.0 && t < period)) {
    std::ostringstream os;
    os << "projection: phase time " << t << " outside [0, " << period << ")";
    throw Error(ErrorCode::invalid_argument, os.str());
  }
}

LinearSolution solve_block(const Matrix& M, const Matrix& rhs, double t) {
  try {
    return solve_linear(M, rhs, kProjectionConditioning);
  } catch (const Error&) {
    std::ostringstream os;
    os << "projection: block system singular at t = " << t;
    throw Error(ErrorCode::projection, os.str());
  }
}

Matrix take_cols(const Matrix& m, const std::vector<int>& idx) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(idx.size()));
  for (size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = m.col(idx[j]);
  return out;
}

}  // namespace

Matrix projection_gain(const LtiModel& model, double period, ProfileKind kind, const Matrix& K,
                       double t, double* conditioning) {
  check_phase_time(t, period);
  const Eigen::Index n = model.states();
  const Eigen::Index k = parameter_count(kind, model.inputs());
  if (K.rows() != k || K.cols() != n) throw Error(ErrorCode::invalid_argument, "projection: gain shape");
  DiscreteMap d = discretize_window(model, 0.0, t, kind, period);
  // [A(t) B(t); K I] [E; dU] = [e; 0]
  Matrix M = Matrix::Zero(n + k, n + k);
  M.topLeftCorner(n, n) = d.A;
  M.topRightCorner(n, k) = d.B;
  M.bottomLeftCorner(k, n) = K;
  M.bottomRightCorner(k, k) = Matrix::Identity(k, k);
  Matrix rhs = Matrix::Zero(n + k, n);
  rhs.topRows(n) = Matrix::Identity(n, n);
  LinearSolution s = solve_block(M, rhs, t);
  if (conditioning) *conditioning = s.conditioning;
  return s.x.bottomRows(k);
}

ProjectionSolution project(const LtiModel& model, double period, ProfileKind kind, const Matrix& K,
                           double t, const Vector& error) {
  if (error.size() != model.states()) throw Error(ErrorCode::invalid_argument, "project: error size");
  ProjectionSolution out;
  out.phase_time = t;
  Matrix L = projection_gain(model, period, kind, K, t, &out.conditioning);
  out.correction = L * error;
  // recover E from the first block row: A(t) E = e - B(t) dU
  DiscreteMap d = discretize_window(model, 0.0, t, kind, period);
  out.projected_error = solve_linear(d.A, error - d.B * out.correction).x;
  return out;
}

Matrix constrained_projection_gain(const PhaseModel& phase, const ConstrainedDlqrGain& gain,
                                   double t, double* conditioning, Matrix* projected_map) {
  const double T = phase.period;
  check_phase_time(t, T);
  const LtiModel& model = phase.dynamics;
  const Eigen::Index n = model.states();
  const Eigen::Index m = phase.parameters();
  const Eigen::Index p = gain.constraints();
  const Eigen::Index nv = n - p;
  const Eigen::Index mv = static_cast<Eigen::Index>(gain.free_inputs.size());
  if (gain.assembled.rows() != m || gain.assembled.cols() != n)
    throw Error(ErrorCode::invalid_argument, "project_constrained: gain does not match phase model");

  DiscreteMap rem = discretize_window(model, t, T, phase.profile, T);
  const Matrix At = gain.S_basis * phase.switch_matrix * rem.A;
  const Matrix Bt = gain.S_basis * phase.switch_matrix * rem.B;

  const Matrix Bww = take_cols(Bt.bottomRows(p), gain.bound_inputs);
  const Matrix Bwv = take_cols(Bt.bottomRows(p), gain.free_inputs);
  const Matrix Bvw = take_cols(Bt.topRows(nv), gain.bound_inputs);
  const Matrix Bvv = take_cols(Bt.topRows(nv), gain.free_inputs);

  Matrix Gt(p, n), Ht(p, mv);
  if (p > 0) {
    LinearSolution s;
    try {
      Matrix rhs(p, n + mv);
      rhs << At.bottomRows(p), Bwv;
      s = solve_linear(Bww, rhs, kProjectionConditioning);
    } catch (const Error&) {
      std::ostringstream os;
      os << "project_constrained: bound-input block lost rank at t = " << t << " (remaining "
         << T - t << " s)";
      throw Error(ErrorCode::projection, os.str());
    }
    Gt = -s.x.leftCols(n);
    Ht = -s.x.rightCols(mv);
  }
  const Matrix Abar_t = At.topRows(nv) + Bvw * Gt;  // nv x n
  const Matrix Bbar_t = Bvv + Bvw * Ht;             // nv x mv

  const Eigen::Index sz = nv + mv + p;
  Matrix M = Matrix::Zero(sz, sz);
  M.block(0, 0, nv, nv) = gain.A_reduced;
  M.block(0, nv, nv, mv) = gain.B_reduced - Bbar_t;
  M.block(nv, 0, mv, nv) = gain.K_reduced;
  M.block(nv, nv, mv, mv) = Matrix::Identity(mv, mv);
  M.block(nv + mv, nv, p, mv) = -Ht;
  M.block(nv + mv, nv + mv, p, p) = Matrix::Identity(p, p);
  Matrix rhs = Matrix::Zero(sz, n);
  rhs.topRows(nv) = Abar_t;
  rhs.bottomRows(p) = Gt;
  LinearSolution s = solve_block(M, rhs, t);
  if (conditioning) *conditioning = s.conditioning;

  Matrix L = Matrix::Zero(m, n);
  for (Eigen::Index i = 0; i < mv; ++i) L.row(gain.free_inputs[static_cast<size_t>(i)]) = s.x.row(nv + i);
  for (Eigen::Index i = 0; i < p; ++i)
    L.row(gain.bound_inputs[static_cast<size_t>(i)]) = s.x.row(nv + mv + i);
  if (projected_map) *projected_map = gain.basis.transpose() * s.x.topRows(nv);
  return L;
}

ProjectionSolution project_constrained(const PhaseModel& phase, const ConstrainedDlqrGain& gain,
                                       double t, const Vector& error) {
  if (error.size() != phase.dynamics.states())
    throw Error(ErrorCode::invalid_argument, "project_constrained: error size");
  ProjectionSolution out;
  out.phase_time = t;
  Matrix Y;
  Matrix L = constrained_projection_gain(phase, gain, t, &out.conditioning, &Y);
  out.correction = L * error;
  out.projected_error = Y * error;
  return out;
}

InvertibilityScan invertibility_scan(const LtiModel& model, double period, ProfileKind kind,
                                     const Matrix& K, const std::vector<double>& grid,
                                     double threshold) {
  InvertibilityScan scan;
  scan.threshold = threshold;
  const Eigen::Index k = parameter_count(kind, model.inputs());
  if (K.rows() != k || K.cols() != model.states())
    throw Error(ErrorCode::invalid_argument, "invertibility_scan: gain shape");
  for (double t : grid) {
    double mag = 1.0;
    if (t > 0.0) {
      DiscreteMap d = discretize_window(model, 0.0, t, kind, period);
      Matrix M = Matrix::Identity(k, k) - K * solve_linear(d.A, d.B).x;
      EigenSummary e = eig_magnitudes(M);
      mag = e.magnitudes.back();
    } else {
      mag = 1.0;  // A(0) = I, B(0) = 0
    }
    scan.times.push_back(t);
    scan.min_magnitude.push_back(mag);
    if (mag < threshold) scan.crossing = true;
  }
  return scan;
}

std::pair<double, double> scalar_bounds(double period) {
  if (!(period > 0.0)) throw Error(ErrorCode::invalid_argument, "scalar_bounds: period must be positive");
  double e = std::exp(period);
  return {1.0, e / (e - 1.0)};
}

double to_continuous_gain(double discrete_gain, double period) {
  if (!(period > 0.0)) throw Error(ErrorCode::invalid_argument, "to_continuous_gain: period must be positive");
  double e = std::exp(period);
  double arg = e - (e - 1.0) * discrete_gain;
  if (!(arg > 0.0)) {
    std::ostringstream os;
    os << "to_continuous_gain: discrete gain " << discrete_gain << " gives non-positive pole " << arg;
    throw Error(ErrorCode::invalid_argument, os.str());
  }
  return -std::log(arg) / period + 1.0;
}

double ScalarAnalysis::rate(double t) const {
  double et = std::exp(t);
  return 1.0 + 1.0 / (-et / gain + et - 1.0);
}

ScalarAnalysis analyze_scalar_gain(double period, double gain) {
  ScalarAnalysis s;
  s.period = period;
  s.gain = gain;
  auto [lo, hi] = scalar_bounds(period);
  s.lower = lo;
  s.upper = hi;
  double e = std::exp(period);
  s.discrete_pole = e - (e - 1.0) * gain;
  if (s.discrete_pole > 0.0) {
    s.continuous_gain = to_continuous_gain(gain, period);
    s.continuous_pole = 1.0 - s.continuous_gain;
  } else {
    s.continuous_gain = std::numeric_limits<double>::quiet_NaN();
    s.continuous_pole = std::numeric_limits<double>::quiet_NaN();
  }
  // denominator e^t (1 - 1/gain) - 1 vanishes at t0 = ln(1 / (1 - 1/gain))
  if (gain > 1.0) s.root = std::log(1.0 / (1.0 - 1.0 / gain));
  return s;
}

ScalarAnalysis analyze_scalar(double period, double q, double r) {
  if (!(period > 0.0) || !(q >= 0.0) || !(r > 0.0))
    throw Error(ErrorCode::invalid_argument, "analyze_scalar: need T > 0, Q >= 0, R > 0");
  double e = std::exp(period);
  Matrix A = Matrix::Constant(1, 1, e), B = Matrix::Constant(1, 1, e - 1.0);
  DareSolution d = solve_dare(A, B, Matrix::Constant(1, 1, q), Matrix::Constant(1, 1, r), std::nullopt,
                              /*require_stable=*/false);
  return analyze_scalar_gain(period, d.K(0, 0));
}

}  // namespace tproj
