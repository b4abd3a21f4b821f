#pragma once

#include <string>
#include <vector>

#include "tproj/numerics.hpp"

namespace tproj {

struct LtiModel {
  Matrix a;   // N x N
  Matrix b;   // N x M
  Matrix bw;  // N x D, may have zero columns
  std::vector<std::string> labels;

  LtiModel() = default;
  LtiModel(Matrix a_, Matrix b_, Matrix bw_ = Matrix(), std::vector<std::string> labels_ = {});

  Eigen::Index states() const { return a.rows(); }
  Eigen::Index inputs() const { return b.cols(); }
  Eigen::Index disturbances() const { return bw.cols(); }
  void validate() const;
};

enum class ProfileKind { constant, linear };

/// Number of profile parameters for the given input count.
Eigen::Index parameter_count(ProfileKind kind, Eigen::Index inputs);

/// Input profile over one phase. Linear profiles are stacked endpoints
/// [u(0); u(period)] and are anchored at the phase start.
struct InputProfile {
  ProfileKind kind = ProfileKind::constant;
  Vector params;
  double period = 1.0;

  static InputProfile constant(const Vector& u);
  static InputProfile linear(const Vector& start, const Vector& end, double period);

  Eigen::Index inputs() const;
  Vector at(double t) const;
};

struct DiscreteMap {
  Matrix A;
  Matrix B;
  double horizon = 0.0;
};

/// Transition over [0, horizon] with B acting on profile parameters.
/// `period` anchors the linear basis and defaults to the horizon.
DiscreteMap discretize(const LtiModel& model, double horizon, ProfileKind kind, double period = 0.0);

/// Raw pieces of the augmented exponential over a window of length h:
/// x(h) = transition x0 + ramp0 u(t0) + ramp1 du/dt + push w.
struct WindowMaps {
  double length = 0.0;
  Matrix transition;  // N x N
  Matrix ramp0;       // N x M
  Matrix ramp1;       // N x M
  Matrix push;        // N x D

  /// Parameter map for the window starting at phase time t0.
  Matrix param_map(double t0, ProfileKind kind, double period) const;
};

WindowMaps window_maps(const LtiModel& model, double length);

/// Map from profile parameters to the state contribution at t1 of inputs on [t0, t1].
DiscreteMap discretize_window(const LtiModel& model, double t0, double t1, ProfileKind kind,
                              double period);

/// Piecewise-constant signal: values[i] holds on [breaks[i], breaks[i+1]).
/// The last value holds until `end`.
struct PiecewiseConstant {
  std::vector<double> breaks;
  std::vector<Vector> values;
  double end = 0.0;

  static PiecewiseConstant zero(Eigen::Index dim, double end);
  /// Zero except `value` on [t0, t1).
  static PiecewiseConstant pulse(const Vector& value, double t0, double t1, double end);

  Eigen::Index dim() const;
  Vector at(double t) const;
  void validate() const;
};

/// Exact propagation from phase time t_start to t under a phase-anchored profile.
Vector propagate(const LtiModel& model, const Vector& x0, const InputProfile& profile,
                 const PiecewiseConstant& disturbance, double t, double t_start = 0.0);

/// Hybrid phase: continuous dynamics over one period, then reset x -> S x.
/// The constraint rows act on the post-reset state.
struct PhaseModel {
  LtiModel dynamics;
  double period = 1.0;
  Matrix switch_matrix;
  Matrix constraint;
  ProfileKind profile = ProfileKind::linear;

  /// Phase-to-phase map including the reset.
  DiscreteMap step_map() const;
  Eigen::Index parameters() const { return parameter_count(profile, dynamics.inputs()); }
};

}  // namespace tproj
