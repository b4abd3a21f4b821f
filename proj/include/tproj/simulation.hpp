#pragma once

#include <limits>
#include <string>
#include <vector>

#include "tproj/dlqr.hpp"
#include "tproj/walking_model.hpp"

namespace tproj {

enum class Controller { open_loop, dlqr, time_projection, capture_point };

const char* controller_name(Controller c);
Controller parse_controller(const std::string& name);

/// Constant force on the pelvis over [start, end). With phase_relative the
/// times are fractions of phase `phase` (0-based); otherwise seconds.
struct DisturbanceEvent {
  Eigen::Vector2d force = Eigen::Vector2d::Zero();
  double start = 0.0;
  double end = 0.0;
  bool phase_relative = false;
  int phase = 0;

  double start_time(double period) const { return phase_relative ? (phase + start) * period : start; }
  double end_time(double period) const { return phase_relative ? (phase + end) * period : end; }
};

struct Saturation {
  double torque_limit = std::numeric_limits<double>::infinity();  // N m, per axis
  double reach_limit = std::numeric_limits<double>::infinity();   // |swing - pelvis| at touchdown, per axis
};

struct Scenario {
  Controller controller = Controller::time_projection;
  std::vector<DisturbanceEvent> events;
  Vector initial_error = Vector::Zero(state::size);
  Eigen::Vector2d persistent_force = Eigen::Vector2d::Zero();
  int steps = 10;
  double dt = 1e-3;
  double divergence_threshold = 10.0;  // normalized error norm
  Saturation saturation;
  bool record_ticks = true;

  void validate(double period) const;
};

struct TickRecord {
  double t = 0.0;
  Eigen::Vector2d pelvis, swing, stance;
  Eigen::Vector2d pelvis_velocity, swing_velocity;
  Eigen::Vector2d input;  // hip torques (sagittal, lateral)
  Eigen::Vector2d force;
  double error_norm = 0.0;
};

struct StepRecord {
  int step = 0;           // touchdowns counted from 1
  double err_norm = 0.0;  // normalized, after the switch
  Eigen::Vector2d foot;   // world touchdown position
  Vector error;           // phase-start error of the next phase
};

struct Trajectory {
  std::vector<TickRecord> ticks;
  std::vector<StepRecord> steps;
  bool fallen = false;
  double fallen_time = std::numeric_limits<double>::quiet_NaN();

  double summed_error(int steps) const;
};

/// Closed-loop simulation with per-tick exact propagation. Controller
/// matrices are computed once and reused across scenarios.
class ClosedLoopSimulator {
public:
  ClosedLoopSimulator(const WalkingModel& model, const NominalGait& nominal,
                      const ConstrainedDlqrGain& gain, double dt = 1e-3);

  Trajectory run(const Scenario& scenario) const;

  int ticks_per_phase() const { return ticks_; }
  double tick() const { return dt_; }
  /// Time-projection map at tick j (held inside the clamp window).
  const Matrix& projection_map(int j) const { return tp_[static_cast<size_t>(j)]; }
  const WalkingModel& model() const { return model_; }

private:
  struct TickMaps {
    Matrix rem_A;  // e(t_j) -> e(T)
    Matrix rem_B;  // correction -> e(T)
  };

  Vector correction(Controller c, int j, const Vector& e, const Vector& held, bool fresh_phase) const;
  Vector saturate(const Vector& correction, const Vector& e, int j, const Saturation& s) const;

  WalkingModel model_;
  NominalGait nominal_;
  ConstrainedDlqrGain gain_;
  double dt_;
  int ticks_;
  int last_update_;  // last tick outside the clamp window
  WindowMaps tick_maps_;
  std::vector<Matrix> tp_;
  std::vector<TickMaps> rem_;
  std::vector<Vector> nominal_states_;
  Vector nominal_end_;
  double capture_velocity_;
};

Trajectory simulate(const WalkingModel& model, const NominalGait& nominal, const ConstrainedDlqrGain& gain,
                    const Scenario& scenario);

std::string trajectory_csv(const Trajectory& traj, const std::string& provenance = "");
std::string touchdown_csv(const Trajectory& traj, const std::string& provenance = "");

/// Touchdown error norms at steps 1..3 for each swept push timing.
struct TimingCell {
  double start_pct = 0.0;
  double end_pct = 0.0;
  std::array<double, 3> err{};
};

struct TimingSurface {
  Controller controller = Controller::open_loop;
  std::vector<TimingCell> cells;
};

/// Push of fixed force over [start%, end%) of the first phase for every
/// grid pair with start < end; one surface per controller.
std::vector<TimingSurface> timing_sensitivity(const ClosedLoopSimulator& sim, const Eigen::Vector2d& force,
                                              const std::vector<double>& start_pct,
                                              const std::vector<double>& end_pct,
                                              const std::vector<Controller>& controllers);

std::string surface_csv(const TimingSurface& s, const std::string& provenance = "");

}  // namespace tproj
