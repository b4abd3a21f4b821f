#pragma once

#include <array>
#include <string>

#include "tproj/dlqr.hpp"
#include "tproj/lti.hpp"

namespace tproj {

struct RobotParams {
  double total_mass = 150.0;            // kg
  double leg_length = 0.9;              // m
  double com_height = 0.88;             // m
  double leg_mass_fraction = 0.12;      // of total mass, per leg
  double leg_mass_height_fraction = 0.3;  // leg mass position along the leg, from the foot
  double gravity = 9.81;
  double step_frequency = 2.0;          // steps/s

  double period() const { return 1.0 / step_frequency; }
  double leg_mass() const { return leg_mass_fraction * total_mass; }
  double torso_mass() const { return (1.0 - 2.0 * leg_mass_fraction) * total_mass; }
  double torso_height() const;
  void validate() const;

  /// Geometric scaling: lengths by c, mass by c^3, frequency by 1/sqrt(c).
  RobotParams scaled(double c) const;
  /// Moves mass between torso and legs keeping the torso height fixed.
  RobotParams with_leg_mass_fraction(double fraction) const;
  RobotParams with_frequency(double f) const;
};

/// Parses flat `key = value` text; '#' starts a comment. Unknown keys throw.
RobotParams parse_robot_params(const std::string& text, RobotParams base = RobotParams{});
RobotParams load_robot_params(const std::string& path);
std::string format_robot_params(const RobotParams& p, const std::string& prefix = "");

/// State layout: relative positions then their rates, each as (x, y).
namespace state {
inline constexpr int swing_x = 0, swing_y = 1, pelvis_x = 2, pelvis_y = 3;
inline constexpr int swing_vx = 4, swing_vy = 5, pelvis_vx = 6, pelvis_vy = 7;
inline constexpr int size = 8;
}  // namespace state

enum class Axis { sagittal = 0, lateral = 1 };
enum class Side { left, right };

struct WalkingModel {
  RobotParams params;
  PhaseModel phase;
  /// The lateral frame flips with the stance side, which allows in-place
  /// lateral oscillation with a fixed step width.
  bool lateral_mirrored = false;

  double period() const { return phase.period; }
  /// Rows/columns of the 4-state block that belongs to one axis.
  static std::array<int, 4> axis_states(Axis axis);
  /// Profile parameters that belong to one axis: (start, end).
  static std::array<int, 2> axis_params(Axis axis);
  /// Diagonal scaling that makes states dimensionless (1/l, 1/sqrt(g l)).
  Vector state_scale() const;
  double normalized_norm(const Vector& error) const;
};

WalkingModel build_3lp(const RobotParams& params, bool lateral_mirrored = false);

/// 2x2 per-axis switch block s = [[-1, 0], [-1, 1]].
Matrix switch_block();

CostDesign walking_cost(const WalkingModel& model, double mu);
ConstrainedDlqrGain design_walking_gain(const WalkingModel& model, double mu);

struct GaitState {
  Vector x = Vector::Zero(state::size);
  Side stance = Side::left;
  Eigen::Vector2d anchor = Eigen::Vector2d::Zero();  // world stance-foot position
  double phase_clock = 0.0;
};

struct WorldPose {
  Eigen::Vector2d stance, swing, pelvis;
  Eigen::Vector2d swing_velocity, pelvis_velocity;
};

/// Lateral sign of the body frame for the given stance side.
double lateral_sign(const WalkingModel& model, Side stance);
WorldPose world_pose(const WalkingModel& model, const GaitState& s);

/// Touchdown: x -> S x, anchor moves to the swing foot, stance side flips.
GaitState switch_legs(const WalkingModel& model, const GaitState& s);

struct NominalGait {
  Vector X;  // phase-start state
  Vector U;  // profile parameters
  double speed = 0.0;
  double step_width = 0.0;
  bool lateral_oscillation = false;

  /// Nominal state at phase time t.
  Vector state_at(const WalkingModel& model, double t) const;
};

/// Minimum-norm periodic gait with zero swing velocity at touchdown and
/// sagittal step length speed*T. Lateral oscillation needs a mirrored model
/// and places the swing foot step_width to the outside.
NominalGait nominal_gait(const WalkingModel& model, double speed, bool lateral_oscillation = false,
                         double step_width = 0.0);

struct CaptureGains {
  double position = 1.0;  // on pelvis offset relative to the stance foot
  double velocity = 0.0;  // sqrt(h/g)

  /// Coefficient on e2 once the footstep is measured from the current pelvis,
  /// as the gain tables do.
  double table_position() const { return position - 1.0; }
  double table_velocity() const { return velocity; }
  /// Footstep adjustment relative to the stance foot.
  double adjustment(double offset, double rate) const { return position * offset + velocity * rate; }
};

CaptureGains capture_gains(const RobotParams& params);

}  // namespace tproj
