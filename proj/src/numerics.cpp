#include "tproj/numerics.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tproj {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::numerics: return "numerics";
    case ErrorCode::synthesis: return "synthesis";
    case ErrorCode::projection: return "projection";
    case ErrorCode::infeasible: return "infeasible";
  }
  return "unknown";
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite())
    throw Error(ErrorCode::invalid_argument, std::string(what) + ": non-finite entry");
}

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << ": expected square matrix, got " << m.rows() << "x" << m.cols();
    throw Error(ErrorCode::invalid_argument, os.str());
  }
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Matrix expm(const Matrix& m) {
  require_square(m, "expm");
  require_finite(m, "expm");
  if (m.size() == 0) return m;
  Matrix out = m.exp();
  if (!out.allFinite())
    throw Error(ErrorCode::numerics, "expm: result overflowed (norm " +
                                         std::to_string(m.lpNorm<Eigen::Infinity>()) + ")");
  return out;
}

EigenSummary eig_magnitudes(const Matrix& m) {
  require_square(m, "eig_magnitudes");
  require_finite(m, "eig_magnitudes");
  EigenSummary s;
  if (m.size() == 0) return s;
  Eigen::EigenSolver<Matrix> es(m, true);
  if (es.info() != Eigen::Success) {
    // residual of whatever the iteration produced, for the report
    double res = (m.cast<std::complex<double>>() * es.eigenvectors() -
                  es.eigenvectors() * es.eigenvalues().asDiagonal())
                     .norm();
    throw Error(ErrorCode::numerics,
                "eig_magnitudes: QR iteration did not converge, residual " + std::to_string(res));
  }
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    s.magnitudes.push_back(std::abs(es.eigenvalues()[i]));
  std::sort(s.magnitudes.begin(), s.magnitudes.end(), std::greater<>());
  s.spectral_radius = s.magnitudes.front();
  return s;
}

LinearSolution solve_linear(const Matrix& M, const Matrix& rhs, double min_conditioning) {
  require_square(M, "solve_linear");
  if (rhs.rows() != M.rows())
    throw Error(ErrorCode::invalid_argument, "solve_linear: rhs row count mismatch");
  require_finite(M, "solve_linear");
  require_finite(rhs, "solve_linear rhs");
  LinearSolution out;
  if (M.size() == 0) {
    out.x = Matrix::Zero(0, rhs.cols());
    out.conditioning = 1.0;
    return out;
  }
  Eigen::PartialPivLU<Matrix> lu(M);
  auto diag = lu.matrixLU().diagonal().cwiseAbs();
  double big = diag.maxCoeff();
  out.conditioning = big > 0.0 ? diag.minCoeff() / big : 0.0;
  if (!(out.conditioning >= min_conditioning)) {
    std::ostringstream os;
    os << "solve_linear: matrix singular to tolerance (pivot ratio " << out.conditioning << ")";
    throw Error(ErrorCode::numerics, os.str());
  }
  out.x = lu.solve(rhs);
  // refinement with residuals in extended precision
  using Wide = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const Wide Mw = M.cast<long double>(), rw = rhs.cast<long double>();
  for (int sweep = 0; sweep < 2; ++sweep) {
    Wide r = rw - Mw * out.x.cast<long double>();
    out.x += lu.solve(Matrix(r.cast<double>()));
  }
  return out;
}

DareSolution solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                        const std::optional<Matrix>& N, bool require_stable) {
  require_square(A, "solve_dare A");
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  if (B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != m || R.cols() != m)
    throw Error(ErrorCode::invalid_argument, "solve_dare: dimension mismatch");
  if (N && (N->rows() != n || N->cols() != m))
    throw Error(ErrorCode::invalid_argument, "solve_dare: cross term dimension mismatch");
  for (const Matrix* p : {&A, &B, &Q, &R}) require_finite(*p, "solve_dare");

  const Matrix Rs = symmetrize(R);
  Eigen::LLT<Matrix> rchol(Rs);
  if (rchol.info() != Eigen::Success)
    throw Error(ErrorCode::invalid_argument, "solve_dare: R is not positive definite");

  // completion of squares: u = v - R^-1 N' x removes the cross term
  Matrix Ar = A;
  Matrix Qr = symmetrize(Q);
  Matrix shift = Matrix::Zero(m, n);
  if (N) {
    shift = rchol.solve(N->transpose());
    Ar = A - B * shift;
    Qr = symmetrize(Q - *N * shift);
  }

  DareSolution out;
  Matrix P = Qr;
  const int max_iter = 200000;
  for (int it = 1; it <= max_iter; ++it) {
    Matrix S = Rs + B.transpose() * P * B;
    Matrix K = S.ldlt().solve(B.transpose() * P * Ar);
    Matrix next = symmetrize(Qr + Ar.transpose() * P * (Ar - B * K));
    if (!next.allFinite() || next.lpNorm<Eigen::Infinity>() > 1e15)
      throw Error(ErrorCode::synthesis, "solve_dare: Riccati recursion diverged (uncontrollable pair?)");
    double step = (next - P).lpNorm<Eigen::Infinity>();
    double scale = std::max(1.0, next.lpNorm<Eigen::Infinity>());
    P = next;
    if (step <= 1e-12 * scale) {
      out.iterations = it;
      break;
    }
    if (it == max_iter)
      throw Error(ErrorCode::synthesis, "solve_dare: no convergence within iteration cap");
  }
  Matrix S = Rs + B.transpose() * P * B;
  out.P = P;
  out.K = S.ldlt().solve(B.transpose() * P * Ar) + shift;
  out.spectral_radius = eig_magnitudes(A - B * out.K).spectral_radius;
  if (require_stable && !(out.spectral_radius < 1.0))
    throw Error(ErrorCode::synthesis, "solve_dare: closed loop not stable (spectral radius " +
                                          std::to_string(out.spectral_radius) + ")");
  return out;
}

}  // namespace tproj
