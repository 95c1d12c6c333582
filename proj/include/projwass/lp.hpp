#pragma once

#include <Eigen/Core>

namespace projwass {

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status;
  double value;       // c'x at the optimum
  Eigen::VectorXd x;  // primal solution
  Eigen::VectorXd y;  // equality-row multipliers, y'A <= c' at optimality
};

// Two-phase full-tableau simplex for min c'x s.t. Ax = b, x >= 0.
// Dantzig pricing with a Bland fallback after a degenerate stall; redundant
// rows are tolerated (their artificials stay basic at level 0).
LpResult solve_standard_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c);

}  // namespace projwass
