#include "jcc/simplex.hpp"

#include <cmath>
#include <vector>

#include "jcc/error.hpp"

namespace jcc {

LpResult solve_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c, int max_pivots) {
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  if (b.size() != m || c.size() != n) throw Error(ErrorCode::InvalidParameter, "LP dimension mismatch");
  if (m > 0 && b.minCoeff() < 0.0) throw Error(ErrorCode::InfeasibleInput, "LP right-hand side must be >= 0");

  // Tableau rows 0..m-1 are constraints, row m is the reduced-cost row
  // (negated objective). Columns: n structural, m slack, then the rhs.
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double scale = std::max(std::abs(b[i]), A.row(i).cwiseAbs().maxCoeff());
    const double s = scale > 0.0 ? 1.0 / scale : 1.0;
    t.block(i, 0, 1, n) = A.row(i) * s;
    t(i, n + i) = 1.0;
    t(i, n + m) = b[i] * s;
  }
  const double cscale = c.size() > 0 && c.cwiseAbs().maxCoeff() > 0.0 ? c.cwiseAbs().maxCoeff() : 1.0;
  t.block(m, 0, 1, n) = -c.transpose() / cscale;

  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;

  constexpr double kTol = 1e-12;
  LpResult r;
  for (;;) {
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < n + m; ++j) {
      if (t(m, j) < -kTol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;
    Eigen::Index leave = -1;
    double best_ratio = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (t(i, enter) <= kTol) continue;
      const double ratio = t(i, n + m) / t(i, enter);
      if (leave < 0 || ratio < best_ratio - kTol ||
          (ratio <= best_ratio + kTol && basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
        leave = i;
        best_ratio = ratio;
      }
    }
    if (leave < 0) throw Error(ErrorCode::InvalidParameter, "LP is unbounded");
    if (++r.pivots > max_pivots) throw Error(ErrorCode::NonConvergence, "simplex pivot cap reached");

    t.row(leave) /= t(leave, enter);
    for (Eigen::Index i = 0; i <= m; ++i) {
      if (i != leave && t(i, enter) != 0.0) t.row(i) -= t(i, enter) * t.row(leave);
    }
    basis[static_cast<std::size_t>(leave)] = enter;
  }

  r.x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index j = basis[static_cast<std::size_t>(i)];
    if (j < n) r.x[j] = std::max(0.0, t(i, n + m));
  }
  r.objective = c.dot(r.x);
  return r;
}

}  // namespace jcc
