#pragma once

#include <string>
#include <vector>

#include "tproj/walking_model.hpp"

namespace tproj {

/// Footstep adjustment coefficients over one phase. The adjustment is the
/// touchdown swing-foot deviation measured from the current pelvis deviation:
/// dP = k_e1 e1 + k_de1 de1 + k_e2 e2 + k_de2 de2, identical per axis.
struct GainTable {
  std::vector<double> times;
  std::vector<double> k_e1, k_de1, k_e2, k_de2;
  double period = 0.0;
  double mu = 0.0;
  double step_bound = 0.0;              // per-axis clamp on dP
  double lateral_min_separation = 0.0;  // inter-foot clamp, used with a step width
  double nominal_step_width = 0.0;      // 0 disables the separation clamp
  double min_conditioning = 1.0;
  RobotParams params;

  std::size_t size() const { return times.size(); }
};

struct ErrorFrame {
  Eigen::Vector2d e1 = Eigen::Vector2d::Zero();  // swing-foot deviation
  Eigen::Vector2d e2 = Eigen::Vector2d::Zero();  // pelvis deviation
  Eigen::Vector2d de1 = Eigen::Vector2d::Zero();
  Eigen::Vector2d de2 = Eigen::Vector2d::Zero();

  static ErrorFrame from_state(const Vector& error);
  Vector to_state() const;
};

inline constexpr int kDefaultGainGrid = 200;
inline constexpr double kStepBoundRatio = 0.8;
inline constexpr double kLateralSeparationRatio = 0.2;

GainTable compute_gain_table(const WalkingModel& model, const ConstrainedDlqrGain& gain, double mu,
                             int grid = kDefaultGainGrid);

/// Coefficients at phase time t, linearly interpolated.
std::array<double, 4> gains_at(const GainTable& table, double t);

/// Untruncated adjustment.
Eigen::Vector2d raw_adjustment(const GainTable& table, double t, const ErrorFrame& errors);

/// Adjustment after the per-axis bound and the lateral separation clamp.
Eigen::Vector2d apply_gains(const GainTable& table, double t, const ErrorFrame& errors);

/// Fraction of the phase at the end where |k_e1 - 1| stays within tol.
double settle_fraction(const GainTable& table, double tol = 0.05);

enum class MuCriterion { stabilization_fraction, equal_eigenvalues };

struct MuTuning {
  MuCriterion criterion = MuCriterion::stabilization_fraction;
  double mu = 0.0;
  double achieved = 0.0;  // settle fraction, or eigenvalue gap
  bool attained = false;
};

inline constexpr double kMuLow = -4.0;
inline constexpr double kMuHigh = 4.0;
inline constexpr double kTargetSettleFraction = 0.2;

/// Per-axis reduced closed-loop eigenvalue magnitudes, sorted descending.
std::vector<double> axis_closed_loop_magnitudes(const ConstrainedDlqrGain& gain, Axis axis);

MuTuning tune_mu(const RobotParams& params, double frequency, MuCriterion criterion,
                 int grid = kDefaultGainGrid);

std::string gain_table_csv(const GainTable& table, const std::string& provenance = "");

}  // namespace tproj
