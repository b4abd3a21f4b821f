#pragma once

#include "tproj/numerics.hpp"

namespace tproj {

enum class LpStatus { feasible, infeasible, iteration_limit };

struct LpProblem {
  Matrix A_eq;    // rows x n, may have zero rows
  Vector b_eq;
  Matrix A_ub;    // A_ub x <= b_ub
  Vector b_ub;
  Vector lower;   // finite
  Vector upper;   // finite, >= lower

  Eigen::Index variables() const { return lower.size(); }
};

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  Vector x;                 // a feasible point when status == feasible
  double infeasibility = 0; // phase-one objective at termination
  int iterations = 0;
};

/// Phase-one simplex on a dense tableau with Bland's anti-cycling rule.
/// Rows are scaled to unit max-coefficient before pivoting.
LpResult find_feasible_point(const LpProblem& p, int max_iterations = 20000, double tol = 1e-9);

}  // namespace tproj
