#pragma once

#include <Eigen/Core>

#include "projwass/measures.hpp"

namespace projwass {

// entries[(i)*N + j] = ||x_i - x_j||^p, row-major
struct CostVector {
  Eigen::VectorXd entries;
  double p = 1.0;
};

CostVector cost_vector(const GroundSpace& space, double p);
Eigen::MatrixXd cost_matrix(const GroundSpace& space, double p);

struct TransportPlan {
  Eigen::VectorXd entries;  // length N^2, row-major, nonnegative
  double value = 0.0;       // <c, pi>
};

struct DualPair {
  Eigen::VectorXd u, v;  // u_i + v_j <= c_ij + 1e-9
};

struct TransportSolution {
  Eigen::MatrixXd plan;  // n x m
  Eigen::VectorXd u, v;  // complementary potentials, tight on basic cells
  double cost = 0.0;     // <C, plan>
};

// Exact min-cost transport between nonnegative marginals of equal total mass
// (not necessarily 1), by the transportation network simplex.
TransportSolution solve_transport(const Eigen::MatrixXd& C, Eigen::VectorXd a, Eigen::VectorXd b);

struct WassersteinResult {
  double value = 0.0;        // W_p = <c, plan>^(1/p)
  double power_value = 0.0;  // <c, plan>
  TransportPlan plan;
  DualPair dual;  // normalized so u_N = 0; which optimal vertex is reported is solver-dependent
};

WassersteinResult wasserstein_lp(const ProbVector& r, const ProbVector& s, const GroundSpace& space, double p);

// Exact quantile-function formula (int_0^1 |F_r^{-1} - F_s^{-1}|^p dt)^(1/p)
// over the merged CDF breakpoints; points must be strictly increasing.
double wasserstein_1d(const ProbVector& r, const ProbVector& s, const Eigen::VectorXd& points, double p);

// max <u,h1> + <v,h2> over the optimal dual face
// {u_i + v_j <= c_ij, <u,r> + <v,s> = W_p^p}, normalized by u_N = 0.
double dual_face_max(const ProbVector& r, const ProbVector& s, const GroundSpace& space, double p,
                     const DirectionVector& h1, const DirectionVector& h2);

// cost-level variant reusing a precomputed optimal cost <C, pi*>
double dual_face_max_cost(const Eigen::MatrixXd& C, const Eigen::VectorXd& r, const Eigen::VectorXd& s,
                          double power_cost, const Eigen::VectorXd& h1, const Eigen::VectorXd& h2);

// max <g,u> over {u_i - u_j <= c_ij}, normalized by u_N = 0; g must sum to 0.
// Collinear supports (d = 1) use the closed form below, otherwise an LP.
double null_dual_max(const GroundSpace& space, double p, const Eigen::VectorXd& g);

// LP path of null_dual_max for an arbitrary cost matrix
double null_dual_max_cost(const Eigen::MatrixXd& C, const Eigen::VectorXd& g);

// Closed form on a sorted 1-D support: sum_t |g_1 + ... + g_t| * gap_pow_t
// with gap_pow_t = (x_{t+1} - x_t)^p. Only adjacent constraints bind because
// t -> t^p is superadditive on nonnegatives for p >= 1.
double null_cut_value(const Eigen::VectorXd& gap_pow, const Eigen::VectorXd& g_sorted);

}  // namespace projwass
