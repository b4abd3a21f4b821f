#pragma once

#include <array>
#include <string>
#include <vector>

#include "tproj/dlqr.hpp"
#include "tproj/walking_model.hpp"

namespace tproj {

enum class ViabilityLabel { nonviable, max_only, tp_viable, undetermined };

const char* viability_label_name(ViabilityLabel l);

struct ViabilityConfig {
  int coord_x = state::pelvis_vx;  // swept error coordinates, others zero
  int coord_y = state::pelvis_vy;
  double range_x = 1.0;            // cells span [-range, range]
  double range_y = 1.0;
  int resolution = 40;
  int steps = 6;
  int sub_phases = 5;
  double torque_limit = 260.0;     // N m
  double reach_ratio = 0.8;        // |swing - pelvis| <= ratio * l
  double epsilon = 1e-3;           // normalized capture tolerance
  int lp_iterations = 20000;
  bool touchdown_rest = true;        // swing foot stationary at every touchdown
  bool reach_every_sub_phase = false;  // footstep bound also at intermediate sub-phase ends

  void validate() const;
  double cell_value(int i, double range) const;
};

struct ViabilityGrid {
  ViabilityConfig config;
  std::vector<double> xs, ys;
  std::vector<ViabilityLabel> labels;  // row-major, x fastest
  int tp_count = 0;
  int max_count = 0;  // includes tp-viable cells that are max-viable
  int nesting_violations = 0;
  int undetermined = 0;
  int certificate_failures = 0;  // sampled LP solutions that failed replay

  ViabilityLabel at(int ix, int iy) const { return labels[static_cast<size_t>(iy * config.resolution + ix)]; }
  double coverage() const { return max_count > 0 ? static_cast<double>(tp_count) / max_count : 0.0; }
};

/// Sub-phase model of one axis: exact window maps and projection gains.
struct AxisProblem {
  double period = 0.0;
  int sub_phases = 5;
  Matrix transition;               // over one sub-phase, 4x4
  Matrix ramp_start;               // torque at the sub-phase start -> state, 4x1
  Matrix ramp_end;                 // torque at the sub-phase end -> state, 4x1
  std::vector<Matrix> projection;  // 2x4 correction map at each sub-phase start
  std::vector<Matrix> rem_A, rem_B;  // remaining-phase maps from each sub-phase start
  Matrix switch_block;             // 4x4
  std::vector<Vector> nominal;     // nominal axis state at sub-phase boundaries (sub_phases + 1)
  Vector nominal_params;           // 2
  Vector scale;                    // normalization of the 4 states
  LtiModel dynamics;               // the axis block on its own

  double nominal_torque(double t) const;
};

AxisProblem axis_problem(const WalkingModel& model, const ConstrainedDlqrGain& gain, const Vector& nominal_X,
                         const Vector& nominal_U, Axis axis, int sub_phases);

struct AxisOutcome {
  std::vector<double> tp_norm2;  // squared normalized norm at steps 0..n (inf past a violation)
  std::vector<int> feasible;     // LP feasibility for horizons 0..n: 1 yes, 0 no, -1 undetermined
  std::vector<Vector> witness;   // LP solutions for replay, by horizon
};

AxisOutcome evaluate_axis(const AxisProblem& p, const Vector& e0, const ViabilityConfig& cfg, double reach);

ViabilityGrid viability(const WalkingModel& model, const ConstrainedDlqrGain& gain, const Vector& nominal_X,
                        const Vector& nominal_U, const ViabilityConfig& cfg);

std::string viability_csv(const ViabilityGrid& g, const std::string& provenance = "");

}  // namespace tproj
