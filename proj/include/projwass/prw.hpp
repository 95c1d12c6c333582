#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "projwass/entropic.hpp"
#include "projwass/iprw.hpp"
#include "projwass/measures.hpp"
#include "projwass/projections.hpp"
#include "projwass/rng.hpp"

namespace projwass {

struct PrwOptions {
  int restarts = 10;
  int max_iter = 500;
  double step_init = 0.1;
  double backtrack = 0.5;
  double tol = 1e-8;  // stop when the accepted objective change falls below tol*(1+|obj|)
  int max_backtracks = 40;
  std::uint64_t seed = 0;
  double sinkhorn_tol = 1e-10;
  int sinkhorn_max_iter = 100000;
};

struct PrwCandidate {
  StiefelFrame frame;
  double value = 0.0;  // <c,pi>^(1/p) at the frame
  int iterations = 0;
  bool converged = false;
};

struct PrwSolution {
  double value = 0.0;
  StiefelFrame best_frame;
  std::vector<PrwCandidate> candidates;  // one per restart
  std::vector<int> iterations;           // per-restart counts
  bool converged = false;                // true if any restart converged
};

struct ArgmaxSet {
  std::vector<StiefelFrame> frames;
  double tolerance = 0.0;
};

struct GammaVector {
  Eigen::VectorXd entries;  // length N^2, row-major like RegularizedPlan
};

// Projection-robust distance PW_{p,lambda} via multi-start Riemannian ascent
// over d x k frames. Reported objective per frame is <c_p(X_E), pi_lambda>^(1/p);
// ascent uses its exact frame gradient (plan sensitivity included) with a QR
// retraction and Armijo backtracking. p must be a positive even integer.
PrwSolution prw_regularized(const ProbVector& r, const ProbVector& s, const GroundSpace& space, double p,
                            double lambda, int k, const PrwOptions& opts = {});

// Deduplicated near-optimal frames: candidates within eps of the best value,
// collapsed when equal up to a right rotation (Frobenius distance <= 1e-6
// after aligning with the polar factor of E1'E2). eps < 0 selects the default
// 1e-6 * value.
ArgmaxSet argmax_set(const PrwSolution& solution, double eps = -1.0);

// gamma = (1/p) <c,pi>^(1/p-1) c, the gradient of t -> t^(1/p) composed with
// the transport cost at the given plan.
GammaVector gamma_vector(const RegularizedPlan& plan, const CostVector& cost, double p);

// Limit draws for sqrt(nm/(n+m)) (PW(r_n,s_m) - PW(r,s)): per frame E in psi,
// w_E = J' gamma in R^{2N-1}; per draw emit max_E <w_E, (sqrt(delta) G,
// sqrt(1-delta) H_*)> with G ~ N(0,Sigma(r)), H ~ N(0,Sigma(s)). Requires
// strictly positive r, s (interior plans) and even p.
LimitSampleSet prw_limit_sampler(const ProbVector& r, const ProbVector& s, const GroundSpace& space, double p,
                                 double lambda, const ArgmaxSet& psi, double delta, int draws, Rng rng);

}  // namespace projwass
