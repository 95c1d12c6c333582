#include "projwass/entropic.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include <Eigen/Cholesky>

#include "projwass/errors.hpp"

namespace projwass {

ConstraintMatrix constraint_matrices(int N) {
  if (N < 1) throw input_error("constraint matrices need N >= 1");
  const Eigen::Index nn = static_cast<Eigen::Index>(N) * N;
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(2 * N, nn);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const Eigen::Index col = static_cast<Eigen::Index>(i) * N + j;
      full(i, col) = 1.0;
      full(N + j, col) = 1.0;
    }
  }
  ConstraintMatrix out;
  out.reduced = full.topRows(2 * N - 1);
  out.full = std::move(full);
  return out;
}

RegularizedPlan sinkhorn_plan_cost(const Eigen::MatrixXd& C, const Eigen::VectorXd& r, const Eigen::VectorXd& s,
                                   double lambda, const SinkhornOptions& opts) {
  if (lambda <= 0.0) throw input_error("lambda must be > 0");
  if (opts.tol <= 0.0) throw input_error("sinkhorn tolerance must be > 0");
  if (opts.max_iter < 1) throw input_error("sinkhorn max_iter must be >= 1");
  const int N = static_cast<int>(r.size());
  if (s.size() != N || C.rows() != N || C.cols() != N) throw input_error("sinkhorn dimensions mismatch");
  if ((r.array() < 0.0).any() || (s.array() < 0.0).any()) throw input_error("sinkhorn marginals must be nonnegative");
  const double mass = r.sum();
  if (std::abs(mass - s.sum()) > 1e-9 * std::max(1.0, mass)) throw input_error("sinkhorn marginals must share total mass");

  std::vector<int> live_r, live_s;
  for (int i = 0; i < N; ++i) {
    if (r[i] > 0.0) live_r.push_back(i);
  }
  for (int j = 0; j < N; ++j) {
    if (s[j] > 0.0) live_s.push_back(j);
  }

  const double neg_inf = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd u = Eigen::VectorXd::Zero(N), v = Eigen::VectorXd::Zero(N);
  if (opts.warm_start) {
    if (opts.warm_start->first.size() != N || opts.warm_start->second.size() != N) {
      throw input_error("warm start potentials must have length N");
    }
    u = opts.warm_start->first;
    v = opts.warm_start->second;
  }

  RegularizedPlan out;
  out.lambda = lambda;
  out.N = N;
  out.entries = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N) * N);
  if (live_r.empty()) {
    out.dual_potentials = Eigen::VectorXd::Constant(2 * N - 1, neg_inf);
    return out;
  }

  double res = std::numeric_limits<double>::infinity();
  double res_checkpoint = std::numeric_limits<double>::infinity();
  int it = 0;
  for (it = 1; it <= opts.max_iter; ++it) {
    // u_i = lambda*log r_i - lambda*LSE_j((v_j - C_ij)/lambda), rows matched
    for (int i : live_r) {
      double mx = neg_inf;
      for (int j : live_s) mx = std::max(mx, v[j] - C(i, j));
      double sum = 0.0;
      for (int j : live_s) sum += std::exp((v[j] - C(i, j) - mx) / lambda);
      u[i] = lambda * std::log(r[i]) - mx - lambda * std::log(sum);
    }
    // v_j symmetric, columns matched exactly after this half-sweep
    for (int j : live_s) {
      double mx = neg_inf;
      for (int i : live_r) mx = std::max(mx, u[i] - C(i, j));
      double sum = 0.0;
      for (int i : live_r) sum += std::exp((u[i] - C(i, j) - mx) / lambda);
      v[j] = lambda * std::log(s[j]) - mx - lambda * std::log(sum);
    }
    // residual: rows are the stale marginal now
    res = 0.0;
    for (int i : live_r) {
      double rowsum = 0.0;
      for (int j : live_s) rowsum += std::exp((u[i] + v[j] - C(i, j)) / lambda);
      res = std::max(res, std::abs(rowsum - r[i]));
    }
    if (res <= opts.tol) break;
    if (it % 10 == 0) {
      if (res > 2.0 * res_checkpoint) {
        std::ostringstream msg;
        msg << "sinkhorn residual diverging: " << res << " after " << it << " iterations";
        throw convergence_error(msg.str());
      }
      res_checkpoint = res;
    }
  }
  if (res > opts.tol) {
    std::ostringstream msg;
    msg << "sinkhorn did not reach tol " << opts.tol << " within " << opts.max_iter
        << " iterations (residual " << res << ")";
    throw convergence_error(msg.str());
  }

  for (int i : live_r) {
    for (int j : live_s) {
      out.entries(static_cast<Eigen::Index>(i) * N + j) = std::exp((u[i] + v[j] - C(i, j)) / lambda);
    }
  }
  // normalize v_N = 0 so (u, v) stacks into the reduced potentials mu
  const double shift = (s[N - 1] > 0.0) ? v[N - 1] : 0.0;
  Eigen::VectorXd mu(2 * N - 1);
  for (int i = 0; i < N; ++i) mu[i] = (r[i] > 0.0) ? u[i] + shift : neg_inf;
  for (int j = 0; j < N - 1; ++j) mu[N + j] = (s[j] > 0.0) ? v[j] - shift : neg_inf;
  out.dual_potentials = std::move(mu);
  out.iterations = it;
  out.residual = res;
  return out;
}

RegularizedPlan sinkhorn_plan(const ProbVector& r, const ProbVector& s, const GroundSpace& space, double p,
                              double lambda, const SinkhornOptions& opts) {
  if (r.size() != space.N() || s.size() != space.N()) throw input_error("weights must live on the given space");
  return sinkhorn_plan_cost(cost_matrix(space, p), r.w, s.w, lambda, opts);
}

double sinkhorn_divergence(const ProbVector& r, const ProbVector& s, const GroundSpace& space, double p,
                           double lambda, double tol) {
  SinkhornOptions opts;
  opts.tol = tol;
  const RegularizedPlan plan = sinkhorn_plan(r, s, space, p, lambda, opts);
  const CostVector c = cost_vector(space, p);
  const double power = std::max(c.entries.dot(plan.entries), 0.0);
  return (p == 1.0) ? power : std::pow(power, 1.0 / p);
}

namespace {

// S = A_* D A_*' assembled from the plan: [diag(row sums), P_*; P_*', diag(col sums without last)]
Eigen::MatrixXd schur_system(const Eigen::VectorXd& entries, int N) {
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(2 * N - 1, 2 * N - 1);
  for (int i = 0; i < N; ++i) {
    double rowsum = 0.0;
    for (int j = 0; j < N; ++j) {
      const double pij = entries(static_cast<Eigen::Index>(i) * N + j);
      rowsum += pij;
      if (j < N - 1) {
        S(i, N + j) = pij;
        S(N + j, i) = pij;
      }
    }
    S(i, i) = rowsum;
  }
  for (int j = 0; j < N - 1; ++j) {
    double colsum = 0.0;
    for (int i = 0; i < N; ++i) colsum += entries(static_cast<Eigen::Index>(i) * N + j);
    S(N + j, N + j) = colsum;
  }
  return S;
}

void require_interior(const RegularizedPlan& plan, int N) {
  if (plan.N != N || plan.entries.size() != static_cast<Eigen::Index>(N) * N) {
    throw input_error("plan size mismatch");
  }
  if ((plan.entries.array() <= 0.0).any()) {
    throw input_error("plan must be strictly positive (interior) for the sensitivity system");
  }
}

}  // namespace

PlanJacobian plan_jacobian(const RegularizedPlan& plan, int N) {
  require_interior(plan, N);
  const Eigen::MatrixXd S = schur_system(plan.entries, N);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
  if (ldlt.info() != Eigen::Success) throw internal_error("sensitivity system factorization failed on an interior plan");
  const Eigen::MatrixXd X = ldlt.solve(Eigen::MatrixXd::Identity(2 * N - 1, 2 * N - 1));

  PlanJacobian J;
  J.matrix.resize(static_cast<Eigen::Index>(N) * N, 2 * N - 1);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const Eigen::Index row = static_cast<Eigen::Index>(i) * N + j;
      const double pij = plan.entries(row);
      J.matrix.row(row) = pij * X.row(i);
      if (j < N - 1) J.matrix.row(row) += pij * X.row(N + j);
    }
  }
  return J;
}

Eigen::VectorXd jacobian_transpose_apply(const RegularizedPlan& plan, int N, const Eigen::VectorXd& gamma) {
  require_interior(plan, N);
  if (gamma.size() != static_cast<Eigen::Index>(N) * N) throw input_error("gamma length must be N^2");
  Eigen::VectorXd t = Eigen::VectorXd::Zero(2 * N - 1);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const double w = plan.entries(static_cast<Eigen::Index>(i) * N + j) * gamma(static_cast<Eigen::Index>(i) * N + j);
      t[i] += w;
      if (j < N - 1) t[N + j] += w;
    }
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(schur_system(plan.entries, N));
  if (ldlt.info() != Eigen::Success) throw internal_error("sensitivity system factorization failed on an interior plan");
  return ldlt.solve(t);
}

}  // namespace projwass
