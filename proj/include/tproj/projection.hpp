#pragma once

#include <limits>
#include <vector>

#include "tproj/dlqr.hpp"
#include "tproj/lti.hpp"

namespace tproj {

struct ProjectionSolution {
  Vector projected_error;  // equivalent error at the phase start
  Vector correction;       // profile-parameter correction to apply now
  double phase_time = 0.0;
  double conditioning = 0.0;
};

/// Block systems with a pivot ratio below this are reported as singular.
inline constexpr double kProjectionConditioning = 1e-10;
/// Fraction of the period near touchdown where the last correction is held.
inline constexpr double kRemainingTimeClamp = 0.01;

double clamp_projection_time(double t, double period);

/// Map e(t) -> correction for an unconstrained gain (dU = -K E at phase start).
Matrix projection_gain(const LtiModel& model, double period, ProfileKind kind, const Matrix& K,
                       double t, double* conditioning = nullptr);

ProjectionSolution project(const LtiModel& model, double period, ProfileKind kind, const Matrix& K,
                           double t, const Vector& error);

/// Map e(t) -> correction for the terminal-constrained gain of a hybrid phase.
/// Requires 0 <= t < period; no clamping is applied here.
Matrix constrained_projection_gain(const PhaseModel& phase, const ConstrainedDlqrGain& gain,
                                   double t, double* conditioning = nullptr,
                                   Matrix* projected_map = nullptr);

ProjectionSolution project_constrained(const PhaseModel& phase, const ConstrainedDlqrGain& gain,
                                       double t, const Vector& error);

struct InvertibilityScan {
  std::vector<double> times;
  std::vector<double> min_magnitude;
  double threshold = 1e-6;
  bool crossing = false;  // some grid point fell below the threshold
};

/// Smallest eigenvalue magnitude of I - K A(t)^-1 B(t) along the grid.
InvertibilityScan invertibility_scan(const LtiModel& model, double period, ProfileKind kind,
                                     const Matrix& K, const std::vector<double>& grid,
                                     double threshold = 1e-6);

std::pair<double, double> scalar_bounds(double period);

/// Continuous gain whose closed loop matches the discrete eigenvalue over one period.
double to_continuous_gain(double discrete_gain, double period);

/// Unit scalar plant x' = x + u under DLQR and time projection.
struct ScalarAnalysis {
  double period = 1.0;
  double gain = 0.0;             // discrete gain
  double lower = 1.0;
  double upper = 0.0;
  double continuous_gain = 0.0;
  double discrete_pole = 0.0;    // e^T - (e^T - 1) gain
  double continuous_pole = 0.0;  // 1 - continuous gain
  double root = std::numeric_limits<double>::infinity();  // zero of the rate denominator

  bool within_bounds() const { return gain > lower && gain < upper; }
  /// Closed-loop rate x'/x under time projection at phase time t.
  double rate(double t) const;
};

ScalarAnalysis analyze_scalar(double period, double q, double r);
ScalarAnalysis analyze_scalar_gain(double period, double gain);

}  // namespace tproj
