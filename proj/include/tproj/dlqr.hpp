#pragma once

#include <vector>

#include "tproj/numerics.hpp"

namespace tproj {

struct CostDesign {
  Matrix Q;
  Matrix R;
  double length_scale = 1.0;
  double velocity_scale = 1.0;
  double torque_scale = 1.0;
  double mu = 0.0;

  void validate(Eigen::Index states, Eigen::Index params) const;
};

/// Q = diag(1/l^2 on positions, 1/(g l) on velocities), R = 10^mu / (M g l)^2 I.
/// Torques scale with M g l so the design is invariant under geometric scaling.
CostDesign normalized_cost(Eigen::Index positions, Eigen::Index params, double length,
                           double gravity, double mass, double mu);

struct DlqrGain {
  Matrix K;  // dU = -K E
  Matrix P;
  double spectral_radius = 0.0;
};

DlqrGain design_unconstrained(const Matrix& A, const Matrix& B, const CostDesign& design);

/// Orthonormal rows spanning the null space of C, deterministic for a given C.
Matrix complete_basis(const Matrix& C);

struct ConstrainedDlqrGain {
  Matrix basis;      // (N-P) x N, orthogonal complement of C
  Matrix S_basis;    // [basis; C]
  Matrix S_inv;
  Matrix K_reduced;  // dV = -K_reduced Y
  Matrix G;          // P x (N-P), dW from Y
  Matrix G_con;      // P x P, dW from the constrained coordinates C E
  Matrix H;          // P x (M-P), dW from dV
  Matrix A_reduced;
  Matrix B_reduced;
  Matrix assembled;  // M x N, dU = assembled E
  std::vector<int> free_inputs;   // components forming dV
  std::vector<int> bound_inputs;  // components forming dW
  double reduced_spectral_radius = 0.0;

  Eigen::Index constraints() const { return S_basis.rows() - basis.rows(); }
  /// Reduced closed-loop matrix A_reduced - B_reduced K_reduced.
  Matrix reduced_closed_loop() const { return A_reduced - B_reduced * K_reduced; }
};

/// Terminal-constrained DLQR: every closed-loop image satisfies C E[k+1] = 0.
ConstrainedDlqrGain design_constrained(const Matrix& A, const Matrix& B, const Matrix& C,
                                       const CostDesign& design);

/// Index subset of size p of the columns of Bw maximizing |det|; lowest
/// lexicographic subset on ties. Returns empty if p == 0.
std::vector<int> best_input_split(const Matrix& Bw, double* best_det = nullptr);

}  // namespace tproj
