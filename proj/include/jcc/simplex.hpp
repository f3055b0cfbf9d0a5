#pragma once

#include <Eigen/Core>

namespace jcc {

struct LpResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  int pivots = 0;
};

/// Dense primal simplex for  max c'x  s.t.  A x <= b, x >= 0  with b >= 0, so
/// the slack basis is feasible. Bland's rule; rows are rescaled internally.
/// Throws InfeasibleInput if some b_i < 0, InvalidParameter if unbounded.
LpResult solve_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c, int max_pivots = 100000);

}  // namespace jcc
