#include "projwass/prw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "projwass/errors.hpp"

namespace projwass {

namespace {

bool is_positive_even_integer(double p) {
  if (p < 2.0) return false;
  const double r = std::round(p);
  return p == r && std::fmod(r, 2.0) == 0.0;
}

// C_ij = ||y_i - y_j||^p from already-projected points Y (k x N)
Eigen::MatrixXd projected_cost(const Eigen::MatrixXd& Y, double p) {
  const int N = static_cast<int>(Y.cols());
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(N, N);
  for (int a = 0; a < N; ++a) {
    for (int b = a + 1; b < N; ++b) {
      const double dist = (Y.col(a) - Y.col(b)).norm();
      const double c = (p == 2.0) ? dist * dist : std::pow(dist, p);
      C(a, b) = c;
      C(b, a) = c;
    }
  }
  return C;
}

double plan_cost_dot(const Eigen::MatrixXd& C, const RegularizedPlan& plan) {
  const int N = static_cast<int>(C.rows());
  double acc = 0.0;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) acc += C(i, j) * plan.entries[static_cast<Eigen::Index>(i) * N + j];
  }
  return acc;
}

// Exact derivative of <c,pi_lambda(c)> in the cost entries: q = pi + (dpi/dc)' c
// with dpi = (D/lambda)(A_*' S^{-1} A_* D - I) dc, D = diag(pi), S = A_* D A_*'.
// Computed on the subsystem of positive-mass atoms; dead pairs contribute 0.
Eigen::MatrixXd gradient_weights(const RegularizedPlan& plan, const Eigen::MatrixXd& C, const Eigen::VectorXd& r,
                                 const Eigen::VectorXd& s, double lambda) {
  const int N = static_cast<int>(C.rows());
  std::vector<int> live_r, live_s;
  for (int i = 0; i < N; ++i) {
    if (r[i] > 0.0) live_r.push_back(i);
  }
  for (int j = 0; j < N; ++j) {
    if (s[j] > 0.0) live_s.push_back(j);
  }
  const int n = static_cast<int>(live_r.size());
  const int m = static_cast<int>(live_s.size());
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(N, N);
  if (n == 0 || m == 0) return q;

  Eigen::MatrixXd Pc(n, m), Cc(n, m);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < m; ++b) {
      Pc(a, b) = plan.entries[static_cast<Eigen::Index>(live_r[a]) * N + live_s[b]];
      Cc(a, b) = C(live_r[a], live_s[b]);
    }
  }

  const int dim = n + m - 1;
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(dim, dim);
  S.topLeftCorner(n, n).diagonal() = Pc.rowwise().sum();
  if (m > 1) {
    S.topRightCorner(n, m - 1) = Pc.leftCols(m - 1);
    S.bottomLeftCorner(m - 1, n) = Pc.leftCols(m - 1).transpose();
    S.bottomRightCorner(m - 1, m - 1).diagonal() = Pc.colwise().sum().head(m - 1);
  }
  const Eigen::MatrixXd M = Pc.cwiseProduct(Cc);
  Eigen::VectorXd t(dim);
  t.head(n) = M.rowwise().sum();
  if (m > 1) t.tail(m - 1) = M.colwise().sum().head(m - 1).transpose();

  Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
  if (ldlt.info() != Eigen::Success) throw internal_error("plan sensitivity system is not factorizable");
  const Eigen::VectorXd w = ldlt.solve(t);

  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < m; ++b) {
      const double adj = w[a] + (b < m - 1 ? w[n + b] : 0.0);
      q(live_r[a], live_s[b]) = Pc(a, b) * (1.0 + (adj - Cc(a, b)) / lambda);
    }
  }
  return q;
}

struct FrameEval {
  Eigen::MatrixXd C;
  RegularizedPlan plan;
  double power = 0.0;  // <c,pi>
};

FrameEval evaluate_frame(const Eigen::MatrixXd& X, const Eigen::MatrixXd& E, const Eigen::VectorXd& r,
                         const Eigen::VectorXd& s, double p, double lambda, const SinkhornOptions& so) {
  FrameEval fe;
  fe.C = projected_cost(E.transpose() * X, p);
  fe.plan = sinkhorn_plan_cost(fe.C, r, s, lambda, so);
  fe.power = plan_cost_dot(fe.C, fe.plan);
  return fe;
}

SinkhornOptions warmed(const SinkhornOptions& base, const RegularizedPlan& plan) {
  const int N = plan.N;
  Eigen::VectorXd uw(N), vw(N);
  for (int i = 0; i < N; ++i) {
    const double a = plan.dual_potentials[i];
    uw[i] = std::isfinite(a) ? a : 0.0;
  }
  vw[N - 1] = 0.0;
  for (int j = 0; j + 1 < N; ++j) {
    const double b = plan.dual_potentials[N + j];
    vw[j] = std::isfinite(b) ? b : 0.0;
  }
  SinkhornOptions so = base;
  so.warm_start = std::make_pair(std::move(uw), std::move(vw));
  return so;
}

PrwCandidate run_restart(const Eigen::MatrixXd& X, const Eigen::VectorXd& r, const Eigen::VectorXd& s, double p,
                         double lambda, int k, const PrwOptions& opts, Rng rng) {
  const int d = static_cast<int>(X.rows());
  const int N = static_cast<int>(X.cols());
  StiefelFrame frame = sample_uniform_frame(d, k, rng);

  PrwCandidate cand;
  cand.frame = frame;
  cand.value = -std::numeric_limits<double>::infinity();
  const SinkhornOptions so_cold{opts.sinkhorn_tol, opts.sinkhorn_max_iter, std::nullopt};

  try {
    FrameEval cur = evaluate_frame(X, frame.columns, r, s, p, lambda, so_cold);
    cand.value = std::pow(std::max(cur.power, 0.0), 1.0 / p);
    double step = opts.step_init;

    for (int it = 1; it <= opts.max_iter; ++it) {
      cand.iterations = it;
      const Eigen::MatrixXd q = gradient_weights(cur.plan, cur.C, r, s, lambda);

      // frame gradient of <c,pi>: sum_ij q_ij * p||E'z||^{p-2} z z' E
      Eigen::MatrixXd W = Eigen::MatrixXd::Zero(d, d);
      for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
          if (q(i, j) == 0.0) continue;
          const double coef = (p == 2.0) ? 2.0 : p * std::pow(cur.C(i, j), (p - 2.0) / p);
          if (coef == 0.0) continue;
          const Eigen::VectorXd z = X.col(i) - X.col(j);
          W.noalias() += (q(i, j) * coef) * z * z.transpose();
        }
      }
      const Eigen::MatrixXd G = W * frame.columns;
      const Eigen::MatrixXd sym = 0.5 * (frame.columns.transpose() * G + G.transpose() * frame.columns);
      const Eigen::MatrixXd xi = G - frame.columns * sym;
      const double slope = xi.squaredNorm();
      if (std::sqrt(slope) <= 1e-12 * (1.0 + G.norm())) {
        cand.converged = true;
        break;
      }

      bool accepted = false;
      double st = step;
      double gain = 0.0;
      for (int bt = 0; bt < opts.max_backtracks; ++bt) {
        StiefelFrame next;
        try {
          next = qr_retract(frame, xi, st);
        } catch (const retraction_error&) {
          st *= opts.backtrack;
          continue;
        }
        FrameEval trial = evaluate_frame(X, next.columns, r, s, p, lambda, warmed(so_cold, cur.plan));
        if (trial.power >= cur.power + 1e-4 * st * slope) {
          gain = trial.power - cur.power;
          cur = std::move(trial);
          frame = std::move(next);
          step = std::min(st * 2.0, 1e3);
          accepted = true;
          break;
        }
        st *= opts.backtrack;
      }
      cand.frame = frame;
      cand.value = std::pow(std::max(cur.power, 0.0), 1.0 / p);
      if (!accepted) {
        // Armijo could not improve at any admissible step: stationary to
        // working precision
        cand.converged = true;
        break;
      }
      if (gain <= opts.tol * (1.0 + std::abs(cur.power))) {
        cand.converged = true;
        break;
      }
    }
  } catch (const convergence_error&) {
    cand.converged = false;
  }
  return cand;
}

}  // namespace

PrwSolution prw_regularized(const ProbVector& r, const ProbVector& s, const GroundSpace& space, double p,
                            double lambda, int k, const PrwOptions& opts) {
  if (!is_positive_even_integer(p)) throw input_error("regularized projection ascent needs even integer p >= 2");
  if (lambda <= 0.0) throw input_error("lambda must be positive");
  if (k < 1 || k > space.d()) throw input_error("k must satisfy 1 <= k <= d");
  if (r.size() != space.N() || s.size() != space.N()) throw input_error("weights must live on the given space");
  if (opts.restarts < 1) throw input_error("restarts must be >= 1");

  Rng root(opts.seed);
  PrwSolution sol;
  sol.candidates.reserve(opts.restarts);
  for (int t = 0; t < opts.restarts; ++t) {
    sol.candidates.push_back(run_restart(space.points, r.w, s.w, p, lambda, k, opts, root.fold(t)));
    sol.iterations.push_back(sol.candidates.back().iterations);
  }
  int best = 0;
  for (int t = 1; t < opts.restarts; ++t) {
    if (sol.candidates[t].value > sol.candidates[best].value) best = t;
  }
  sol.value = sol.candidates[best].value;
  sol.best_frame = sol.candidates[best].frame;
  for (const PrwCandidate& c : sol.candidates) sol.converged = sol.converged || c.converged;
  if (!sol.converged) {
    std::ostringstream msg;
    msg << "no ascent restart converged (restarts " << opts.restarts << ", max_iter " << opts.max_iter
        << ", best value " << sol.value << "); raise restarts or max_iter";
    throw convergence_error(msg.str());
  }
  return sol;
}

ArgmaxSet argmax_set(const PrwSolution& solution, double eps) {
  if (!solution.converged) throw input_error("argmax set needs a converged solution");
  if (eps < 0.0) eps = 1e-6 * std::abs(solution.value);

  std::vector<int> order(solution.candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return solution.candidates[a].value > solution.candidates[b].value;
  });

  ArgmaxSet out;
  out.tolerance = eps;
  for (int idx : order) {
    const PrwCandidate& c = solution.candidates[idx];
    if (!(c.value >= solution.value - eps)) break;
    bool duplicate = false;
    for (const StiefelFrame& kept : out.frames) {
      // objective depends on E only through EE'; align up to right rotation
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(kept.columns.transpose() * c.frame.columns,
                                            Eigen::ComputeThinU | Eigen::ComputeThinV);
      const Eigen::MatrixXd R = svd.matrixU() * svd.matrixV().transpose();
      if ((kept.columns * R - c.frame.columns).norm() <= 1e-6) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) out.frames.push_back(c.frame);
  }
  return out;
}

GammaVector gamma_vector(const RegularizedPlan& plan, const CostVector& cost, double p) {
  if (p < 1.0) throw input_error("p must be >= 1");
  if (cost.p != p) throw input_error("cost vector was built for a different power");
  if (cost.entries.size() != plan.entries.size()) throw input_error("cost and plan dimensions mismatch");
  const double power = cost.entries.dot(plan.entries);
  if (power <= 0.0) throw input_error("transport cost is zero; the rooted distance is not differentiable there");
  GammaVector g;
  const double kappa = (p == 1.0) ? 1.0 : std::pow(power, 1.0 / p - 1.0) / p;
  g.entries = kappa * cost.entries;
  return g;
}

LimitSampleSet prw_limit_sampler(const ProbVector& r, const ProbVector& s, const GroundSpace& space, double p,
                                 double lambda, const ArgmaxSet& psi, double delta, int draws, Rng rng) {
  if (psi.frames.empty()) throw input_error("argmax set must contain at least one frame");
  if (!is_positive_even_integer(p)) throw input_error("limit sampler needs even integer p >= 2");
  if (lambda <= 0.0) throw input_error("lambda must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw input_error("delta must lie in (0,1)");
  if (draws < 1) throw input_error("limit sampler needs draws >= 1");
  if (r.size() != space.N() || s.size() != space.N()) throw input_error("weights must live on the given space");
  if ((r.w.array() <= 0.0).any() || (s.w.array() <= 0.0).any()) {
    throw input_error("limit sampler needs strictly positive weights (interior plans)");
  }

  const int N = space.N();
  std::vector<Eigen::VectorXd> w_frames;
  w_frames.reserve(psi.frames.size());
  for (const StiefelFrame& E : psi.frames) {
    if (E.d() != space.d()) throw input_error("argmax frames must match the space dimension");
    const Eigen::MatrixXd C = projected_cost(E.columns.transpose() * space.points, p);
    if (C.maxCoeff() <= 0.0) {
      // all points project to one atom: the distance is identically 0 near
      // (r,s) and the frame contributes a zero functional
      w_frames.push_back(Eigen::VectorXd::Zero(2 * N - 1));
      continue;
    }
    const RegularizedPlan plan = sinkhorn_plan_cost(C, r.w, s.w, lambda, {});
    CostVector cv;
    cv.p = p;
    cv.entries.resize(static_cast<Eigen::Index>(N) * N);
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j < N; ++j) cv.entries[static_cast<Eigen::Index>(i) * N + j] = C(i, j);
    }
    const GammaVector gamma = gamma_vector(plan, cv, p);
    w_frames.push_back(jacobian_transpose_apply(plan, N, gamma.entries));
  }

  GaussianSampler gauss_r(multinomial_covariance(r));
  GaussianSampler gauss_s(multinomial_covariance(s));
  const double sd = std::sqrt(delta);
  const double sd1 = std::sqrt(1.0 - delta);

  LimitSampleSet out;
  out.regime = LimitSampleSet::Regime::alternative;
  out.delta = delta;
  out.scaling_exponent = 0.5;
  out.draws.reserve(static_cast<std::size_t>(draws));
  Eigen::VectorXd g(2 * N - 1);
  for (int dct = 0; dct < draws; ++dct) {
    const Eigen::VectorXd G = gauss_r.draw(rng);
    const Eigen::VectorXd H = gauss_s.draw(rng);
    g.head(N) = sd * G;
    g.tail(N - 1) = sd1 * H.head(N - 1);
    double best = -std::numeric_limits<double>::infinity();
    for (const Eigen::VectorXd& w : w_frames) best = std::max(best, w.dot(g));
    out.draws.push_back(best);
  }
  return out;
}

}  // namespace projwass
