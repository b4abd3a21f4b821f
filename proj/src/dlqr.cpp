#include "tproj/dlqr.hpp"

#include <cmath>
#include <functional>
#include <sstream>

namespace tproj {

void CostDesign::validate(Eigen::Index states, Eigen::Index params) const {
  if (Q.rows() != states || Q.cols() != states)
    throw Error(ErrorCode::invalid_argument, "CostDesign: Q dimension mismatch");
  if (R.rows() != params || R.cols() != params)
    throw Error(ErrorCode::invalid_argument, "CostDesign: R dimension mismatch");
  require_finite(Q, "CostDesign.Q");
  require_finite(R, "CostDesign.R");
  if ((Q - Q.transpose()).lpNorm<Eigen::Infinity>() > 1e-12 * std::max(1.0, Q.lpNorm<Eigen::Infinity>()))
    throw Error(ErrorCode::invalid_argument, "CostDesign: Q not symmetric");
  if (Eigen::LLT<Matrix>(symmetrize(R)).info() != Eigen::Success)
    throw Error(ErrorCode::invalid_argument, "CostDesign: R not positive definite");
  if (!(length_scale > 0 && velocity_scale > 0 && torque_scale > 0))
    throw Error(ErrorCode::invalid_argument, "CostDesign: scales must be positive");
}

CostDesign normalized_cost(Eigen::Index positions, Eigen::Index params, double length,
                           double gravity, double mass, double mu) {
  if (!(length > 0 && gravity > 0 && mass > 0))
    throw Error(ErrorCode::invalid_argument, "normalized_cost: scales must be positive");
  CostDesign d;
  d.length_scale = length;
  d.velocity_scale = std::sqrt(gravity * length);
  d.torque_scale = mass * gravity * length;
  d.mu = mu;
  Vector q(2 * positions);
  q.head(positions).setConstant(1.0 / (length * length));
  q.tail(positions).setConstant(1.0 / (gravity * length));
  d.Q = q.asDiagonal();
  d.R = Matrix::Identity(params, params) * (std::pow(10.0, mu) / (d.torque_scale * d.torque_scale));
  return d;
}

DlqrGain design_unconstrained(const Matrix& A, const Matrix& B, const CostDesign& design) {
  design.validate(A.rows(), B.cols());
  DareSolution s = solve_dare(A, B, design.Q, design.R);
  return DlqrGain{s.K, s.P, s.spectral_radius};
}

Matrix complete_basis(const Matrix& C) {
  const Eigen::Index p = C.rows(), n = C.cols();
  require_finite(C, "complete_basis");
  if (p > n) throw Error(ErrorCode::invalid_argument, "complete_basis: more rows than columns");
  if (p == 0) return Matrix::Identity(n, n);
  Eigen::FullPivLU<Matrix> lu(C);
  lu.setThreshold(1e-10);
  if (lu.rank() != p) throw Error(ErrorCode::invalid_argument, "complete_basis: C is rank deficient");

  // column-pivoted Gram-Schmidt on the null-space projector; picking the
  // largest residual column (lowest index on ties) makes the result canonical
  Matrix proj = Matrix::Identity(n, n) - C.transpose() * (C * C.transpose()).ldlt().solve(C);
  Matrix rows(n - p, n);
  std::vector<bool> used(static_cast<size_t>(n), false);
  for (Eigen::Index k = 0; k < n - p; ++k) {
    Eigen::Index best = -1;
    double best_norm = -1.0;
    Vector best_vec;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (used[static_cast<size_t>(j)]) continue;
      Vector v = proj.col(j);
      for (int pass = 0; pass < 2; ++pass)
        for (Eigen::Index i = 0; i < k; ++i) v -= rows.row(i).dot(v) * rows.row(i).transpose();
      double nv = v.norm();
      if (nv > best_norm + 1e-12) {
        best = j;
        best_norm = nv;
        best_vec = v;
      }
    }
    used[static_cast<size_t>(best)] = true;
    best_vec /= best_norm;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(best_vec[i]) > 1e-12) {
        if (best_vec[i] < 0) best_vec = -best_vec;
        break;
      }
    }
    rows.row(k) = best_vec.transpose();
  }
  return rows;
}

std::vector<int> best_input_split(const Matrix& Bw, double* best_det) {
  const int p = static_cast<int>(Bw.rows());
  const int m = static_cast<int>(Bw.cols());
  std::vector<int> best, cur;
  double best_abs = -1.0;
  std::function<void(int)> visit = [&](int start) {
    if (static_cast<int>(cur.size()) == p) {
      Matrix sub(p, p);
      for (int j = 0; j < p; ++j) sub.col(j) = Bw.col(cur[static_cast<size_t>(j)]);
      double d = std::abs(sub.determinant());
      if (d > best_abs) {
        best_abs = d;
        best = cur;
      }
      return;
    }
    for (int j = start; j < m; ++j) {
      cur.push_back(j);
      visit(j + 1);
      cur.pop_back();
    }
  };
  if (p > 0) visit(0);
  if (best_det) *best_det = p > 0 ? best_abs : 1.0;
  return best;
}

namespace {

Matrix take_cols(const Matrix& m, const std::vector<int>& idx) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(idx.size()));
  for (size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = m.col(idx[j]);
  return out;
}

Matrix take(const Matrix& m, const std::vector<int>& r, const std::vector<int>& c) {
  Matrix out(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(c.size()));
  for (size_t i = 0; i < r.size(); ++i)
    for (size_t j = 0; j < c.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(r[i], c[j]);
  return out;
}

}  // namespace

ConstrainedDlqrGain design_constrained(const Matrix& A, const Matrix& B, const Matrix& C,
                                       const CostDesign& design) {
  require_square(A, "design_constrained A");
  const Eigen::Index n = A.rows(), m = B.cols(), p = C.rows();
  if (B.rows() != n || (p > 0 && C.cols() != n))
    throw Error(ErrorCode::invalid_argument, "design_constrained: dimension mismatch");
  if (p >= n) throw Error(ErrorCode::invalid_argument, "design_constrained: need P < N");
  if (m < p) throw Error(ErrorCode::invalid_argument, "design_constrained: need M >= P");
  design.validate(n, m);

  ConstrainedDlqrGain g;
  const Eigen::Index nv = n - p;
  g.basis = complete_basis(p > 0 ? C : Matrix(0, n));
  g.S_basis.resize(n, n);
  g.S_basis << g.basis, (p > 0 ? C : Matrix(0, n));
  g.S_inv = solve_linear(g.S_basis, Matrix::Identity(n, n), 1e-12).x;

  const Matrix At = g.S_basis * A * g.S_inv;
  const Matrix Bt = g.S_basis * B;
  const Matrix Qt = symmetrize(g.S_inv.transpose() * design.Q * g.S_inv);
  const Matrix R = symmetrize(design.R);

  double det = 0.0;
  g.bound_inputs = best_input_split(Bt.bottomRows(p), &det);
  for (int j = 0; j < m; ++j)
    if (std::find(g.bound_inputs.begin(), g.bound_inputs.end(), j) == g.bound_inputs.end())
      g.free_inputs.push_back(j);
  const Matrix Bww = take_cols(Bt.bottomRows(p), g.bound_inputs);
  if (p > 0 && !(det > 1e-12 * std::pow(std::max(1.0, Bt.bottomRows(p).lpNorm<Eigen::Infinity>()), p))) {
    std::ostringstream os;
    os << "design_constrained: bound-input block singular for every split (best |det| " << det
       << ", attempted inputs";
    for (int j : g.bound_inputs) os << ' ' << j;
    os << ")";
    throw Error(ErrorCode::synthesis, os.str());
  }

  const Matrix Bvv = take_cols(Bt.topRows(nv), g.free_inputs);
  const Matrix Bvw = take_cols(Bt.topRows(nv), g.bound_inputs);
  const Matrix Bwv = take_cols(Bt.bottomRows(p), g.free_inputs);
  Matrix Bww_inv = p > 0 ? solve_linear(Bww, Matrix::Identity(p, p), 1e-13).x : Matrix(0, 0);

  g.G = -Bww_inv * At.bottomLeftCorner(p, nv);
  g.G_con = -Bww_inv * At.bottomRightCorner(p, p);
  g.H = -Bww_inv * Bwv;
  g.A_reduced = At.topLeftCorner(nv, nv) + Bvw * g.G;
  g.B_reduced = Bvv + Bvw * g.H;

  const Matrix Rvv = take(R, g.free_inputs, g.free_inputs);
  const Matrix Rvw = take(R, g.free_inputs, g.bound_inputs);
  const Matrix Rwv = take(R, g.bound_inputs, g.free_inputs);
  const Matrix Rww = take(R, g.bound_inputs, g.bound_inputs);
  const Matrix Qr = symmetrize(Qt.topLeftCorner(nv, nv) + g.G.transpose() * Rww * g.G);
  const Matrix Rr = symmetrize(Rvv + g.H.transpose() * Rww * g.H + Rvw * g.H + g.H.transpose() * Rwv);
  const Matrix Nr = g.G.transpose() * (Rww * g.H + Rwv);

  const Eigen::Index mv = static_cast<Eigen::Index>(g.free_inputs.size());
  if (mv == 0) {
    g.K_reduced = Matrix::Zero(0, nv);
    g.reduced_spectral_radius = eig_magnitudes(g.A_reduced).spectral_radius;
    if (!(g.reduced_spectral_radius < 1.0))
      throw Error(ErrorCode::synthesis, "design_constrained: no free inputs and unstable reduced system");
  } else {
    DareSolution s = solve_dare(g.A_reduced, g.B_reduced, Qr, Rr, Nr);
    g.K_reduced = s.K;
    g.reduced_spectral_radius = s.spectral_radius;
  }

  // The free inputs act on the reduced state an arbitrary error maps to
  // after one step, so the gain also holds C E[k+1] = 0 off the manifold
  // and reproduces the time-projected action at phase starts.
  Matrix full_reduced(nv, n);
  full_reduced.leftCols(nv) = g.A_reduced;
  full_reduced.rightCols(p) = At.topRightCorner(nv, p) + Bvw * g.G_con;
  Matrix y_equiv = g.basis;  // fallback: plain reduced coordinates
  {
    Eigen::PartialPivLU<Matrix> lu(g.A_reduced);
    auto d = lu.matrixLU().diagonal().cwiseAbs();
    if (nv > 0 && d.minCoeff() > 1e-10 * d.maxCoeff())
      y_equiv = lu.solve(full_reduced * g.S_basis);
  }
  Matrix dv = -g.K_reduced * y_equiv;                       // mv x n
  Matrix dw = g.G * g.basis + g.G_con * (p > 0 ? C : Matrix(0, n)) + g.H * dv;  // p x n
  g.assembled = Matrix::Zero(m, n);
  for (Eigen::Index i = 0; i < mv; ++i) g.assembled.row(g.free_inputs[static_cast<size_t>(i)]) = dv.row(i);
  for (Eigen::Index i = 0; i < p; ++i) g.assembled.row(g.bound_inputs[static_cast<size_t>(i)]) = dw.row(i);
  return g;
}

}  // namespace tproj
