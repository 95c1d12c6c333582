#pragma once

#include <optional>
#include <utility>

#include <Eigen/Core>

#include "projwass/exact.hpp"
#include "projwass/measures.hpp"

namespace projwass {

// Marginal constraint system: full(i, iN+j) = 1 and full(N+j, iN+j) = 1,
// so A*pi stacks row sums over column sums. reduced drops the last row and
// has full row rank 2N-1.
struct ConstraintMatrix {
  Eigen::MatrixXd full;     // 2N x N^2
  Eigen::MatrixXd reduced;  // (2N-1) x N^2
};

ConstraintMatrix constraint_matrices(int N);

// Entropic plan with its reduced dual potentials mu in R^{2N-1}:
// pi_{ij} = exp((mu_i + mu_{N+j} - c_ij)/lambda) with mu_{2N} treated as 0.
// mu equals the potential pair normalized so v_N = 0; it is only meaningful
// when both marginals are strictly positive (dead atoms carry -inf).
struct RegularizedPlan {
  Eigen::VectorXd entries;  // length N^2, row-major
  double lambda = 1.0;
  Eigen::VectorXd dual_potentials;  // length 2N-1
  int N = 0;
  int iterations = 0;
  double residual = 0.0;
};

struct SinkhornOptions {
  double tol = 1e-10;  // infinity-norm marginal residual
  int max_iter = 100000;
  // optional initial potentials (u, v), e.g. exact LP duals for small lambda
  std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> warm_start;
};

// Log-domain Sinkhorn. Marginals may contain zeros (those rows/columns are
// forced to 0 in the plan) and need not sum to 1, but must share total mass.
RegularizedPlan sinkhorn_plan(const ProbVector& r, const ProbVector& s, const GroundSpace& space, double p,
                              double lambda, const SinkhornOptions& opts = {});

// cost-level core shared by the projected paths
RegularizedPlan sinkhorn_plan_cost(const Eigen::MatrixXd& C, const Eigen::VectorXd& r, const Eigen::VectorXd& s,
                                   double lambda, const SinkhornOptions& opts = {});

// <c_p, pi_{p,lambda}>^(1/p)
double sinkhorn_divergence(const ProbVector& r, const ProbVector& s, const GroundSpace& space, double p,
                           double lambda, double tol = 1e-10);

// J = D A_*' (A_* D A_*')^{-1} with D = diag(pi): partial derivatives of the
// entropic plan in the reduced marginal coordinates (r, s_*).
struct PlanJacobian {
  Eigen::MatrixXd matrix;  // N^2 x (2N-1)
};

PlanJacobian plan_jacobian(const RegularizedPlan& plan, int N);

// w = J' gamma = (A_* D A_*')^{-1} A_* D gamma without forming J
Eigen::VectorXd jacobian_transpose_apply(const RegularizedPlan& plan, int N, const Eigen::VectorXd& gamma);

}  // namespace projwass
