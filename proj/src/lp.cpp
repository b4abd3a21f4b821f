#include "tproj/lp.hpp"

#include <cmath>
#include <vector>

namespace tproj {

LpResult find_feasible_point(const LpProblem& p, int max_iterations, double tol) {
  const Eigen::Index n = p.variables();
  const Eigen::Index me = p.A_eq.rows(), mu = p.A_ub.rows();
  if (p.upper.size() != n || (me > 0 && p.A_eq.cols() != n) || (mu > 0 && p.A_ub.cols() != n) ||
      p.b_eq.size() != me || p.b_ub.size() != mu)
    throw Error(ErrorCode::invalid_argument, "find_feasible_point: dimension mismatch");
  if (!p.lower.allFinite() || !p.upper.allFinite())
    throw Error(ErrorCode::invalid_argument, "find_feasible_point: bounds must be finite");
  LpResult res;
  if ((p.upper - p.lower).minCoeff() < 0.0) {
    res.status = LpStatus::infeasible;
    res.infeasibility = -(p.upper - p.lower).minCoeff();
    return res;
  }

  // shift x = lower + y with 0 <= y <= width; every row becomes an equality
  // with a slack (inequalities and upper bounds) and, when the right-hand
  // side is negative or the row is an equality, an artificial
  const Vector width = p.upper - p.lower;
  const Eigen::Index rows = me + mu + n;
  Matrix A = Matrix::Zero(rows, n);
  Vector b(rows);
  std::vector<int> has_slack(static_cast<size_t>(rows), 0);
  if (me > 0) {
    A.topRows(me) = p.A_eq;
    b.head(me) = p.b_eq - p.A_eq * p.lower;
  }
  if (mu > 0) {
    A.middleRows(me, mu) = p.A_ub;
    b.segment(me, mu) = p.b_ub - p.A_ub * p.lower;
  }
  A.bottomRows(n) = Matrix::Identity(n, n);
  b.tail(n) = width;
  for (Eigen::Index r = me; r < rows; ++r) has_slack[static_cast<size_t>(r)] = 1;

  // column layout: y (n), slacks (mu + n), artificials (as needed)
  const Eigen::Index ns = mu + n;
  std::vector<Eigen::Index> art_row;
  std::vector<double> slack_sign(static_cast<size_t>(rows), 1.0);
  for (Eigen::Index r = 0; r < rows; ++r) {
    double scale = A.row(r).cwiseAbs().maxCoeff();
    if (scale > 0.0) {
      A.row(r) /= scale;
      b(r) /= scale;
    } else if (std::abs(b(r)) > tol && !has_slack[static_cast<size_t>(r)]) {
      res.status = LpStatus::infeasible;
      res.infeasibility = std::abs(b(r));
      return res;
    }
    if (b(r) < 0.0) {
      A.row(r) *= -1.0;
      b(r) *= -1.0;
      slack_sign[static_cast<size_t>(r)] = -1.0;
    }
    if (!has_slack[static_cast<size_t>(r)] || slack_sign[static_cast<size_t>(r)] < 0.0) art_row.push_back(r);
  }
  const Eigen::Index na = static_cast<Eigen::Index>(art_row.size());
  const Eigen::Index cols = n + ns + na;
  Matrix tab = Matrix::Zero(rows + 1, cols + 1);  // last row: phase-one objective
  tab.topLeftCorner(rows, n) = A;
  tab.topRightCorner(rows, 1) = b;
  std::vector<Eigen::Index> basis(static_cast<size_t>(rows), -1);
  for (Eigen::Index r = me; r < rows; ++r)
    tab(r, n + (r - me)) = slack_sign[static_cast<size_t>(r)];
  for (Eigen::Index k = 0; k < na; ++k) {
    Eigen::Index r = art_row[static_cast<size_t>(k)];
    tab(r, n + ns + k) = 1.0;
    basis[static_cast<size_t>(r)] = n + ns + k;
  }
  for (Eigen::Index r = me; r < rows; ++r)
    if (basis[static_cast<size_t>(r)] < 0) basis[static_cast<size_t>(r)] = n + (r - me);
  // reduced costs of minimizing the artificial sum
  for (Eigen::Index k = 0; k < na; ++k) tab.row(rows) -= tab.row(art_row[static_cast<size_t>(k)]);
  for (Eigen::Index k = 0; k < na; ++k) tab(rows, n + ns + k) = 0.0;

  int it = 0;
  for (; it < max_iterations; ++it) {
    Eigen::Index enter = -1;
    for (Eigen::Index c = 0; c < cols; ++c)
      if (tab(rows, c) < -tol) {
        enter = c;
        break;
      }
    if (enter < 0) break;
    Eigen::Index leave = -1;
    double best = 0.0;
    for (Eigen::Index r = 0; r < rows; ++r) {
      double a = tab(r, enter);
      if (a <= tol) continue;
      double ratio = tab(r, cols) / a;
      if (leave < 0 || ratio < best - 1e-12 ||
          (std::abs(ratio - best) <= 1e-12 && basis[static_cast<size_t>(r)] < basis[static_cast<size_t>(leave)])) {
        leave = r;
        best = ratio;
      }
    }
    if (leave < 0) break;  // unbounded direction cannot occur in phase one
    tab.row(leave) /= tab(leave, enter);
    for (Eigen::Index r = 0; r <= rows; ++r) {
      if (r == leave) continue;
      double f = tab(r, enter);
      if (f != 0.0) tab.row(r) -= f * tab.row(leave);
    }
    basis[static_cast<size_t>(leave)] = enter;
  }
  res.iterations = it;
  res.infeasibility = -tab(rows, cols);
  if (it >= max_iterations) {
    res.status = LpStatus::iteration_limit;
    return res;
  }
  Vector y = Vector::Zero(n);
  for (Eigen::Index r = 0; r < rows; ++r)
    if (basis[static_cast<size_t>(r)] < n) y(basis[static_cast<size_t>(r)]) = tab(r, cols);
  res.x = p.lower + y;
  res.status = res.infeasibility <= tol * std::max<double>(1.0, static_cast<double>(rows)) ? LpStatus::feasible
                                                                                        : LpStatus::infeasible;
  return res;
}

}  // namespace tproj
