#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "tproj/error.hpp"

namespace tproj {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Throws invalid_argument if any entry is NaN or infinite.
void require_finite(const Matrix& m, const char* what);
void require_square(const Matrix& m, const char* what);

/// e^m by scaling and squaring with a Pade core.
Matrix expm(const Matrix& m);

struct EigenSummary {
  std::vector<double> magnitudes;  // sorted descending
  double spectral_radius = 0.0;
};

EigenSummary eig_magnitudes(const Matrix& m);

struct DareSolution {
  Matrix P;
  Matrix K;  // optimal input is -K x
  int iterations = 0;
  double spectral_radius = 0.0;  // of A - B K
};

/// Infinite-horizon discrete Riccati solution by fixed-point iteration.
/// The optional cross term N weights 2 x' N u in the stage cost. With
/// require_stable an unstable closed loop (e.g. Q = 0 on an unstable A) throws.
DareSolution solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                        const std::optional<Matrix>& N = std::nullopt, bool require_stable = true);

struct LinearSolution {
  Matrix x;
  double conditioning = 0.0;  // smallest over largest pivot magnitude
};

/// Partial-pivot LU solve. Throws numerics if the pivot ratio falls below min_conditioning.
LinearSolution solve_linear(const Matrix& M, const Matrix& rhs, double min_conditioning = 1e-14);

Matrix symmetrize(const Matrix& m);

}  // namespace tproj
