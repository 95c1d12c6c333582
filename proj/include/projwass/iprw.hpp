#pragma once

#include <vector>

#include "projwass/exact.hpp"
#include "projwass/measures.hpp"
#include "projwass/projections.hpp"

namespace projwass {

// Weighted p-mean over frames of the per-frame Wasserstein distances.
struct IprwEstimate {
  double value = 0.0;
  double p = 1.0;
  const ProjectionSet* projection_set = nullptr;  // non-owning
  Eigen::VectorXd per_frame_values;               // rooted per-frame W_p
};

struct LimitSampleSet {
  std::vector<double> draws;
  enum class Regime { null_regime, alternative } regime = Regime::null_regime;
  double delta = 0.5;
  // exponent of nm/(n+m) that scales the matching empirical statistic:
  // 1/(2p) in the null regime, 1/2 in the alternative
  double scaling_exponent = 0.5;
};

// Per-frame W_p on the merged projected support (1-D quantile path when k=1,
// transport LP otherwise), aggregated as (sum_t w_t V_t^p)^(1/p).
IprwEstimate iprw_distance(const ProbVector& r, const ProbVector& s, const GroundSpace& space, double p,
                           const ProjectionSet& proj);

// Directional derivative of IW_p^p at (r,s) along (h1,h2): the weighted mean
// over frames of the dual-face maxima, with directions summed through each
// frame's merge_map. The derivative of IW_p itself is this value times
// (1/p)*IW_p^{1-p}.
double iprw_derivative(const ProbVector& r, const ProbVector& s, const GroundSpace& space, double p,
                       const ProjectionSet& proj, const DirectionVector& h1, const DirectionVector& h2);

// Null-regime limit draws: per Gaussian draw G ~ N(0, Sigma(r)), the weighted
// frame-mean of max <G_E, u> over the one-potential dual set of the merged
// projected support, then the p-th root. All draws are >= 0.
LimitSampleSet iprw_null_limit_sampler(const ProbVector& r, const GroundSpace& space, double p,
                                       const ProjectionSet& proj, int draws, Rng rng);

// Alternative-regime limit draws: per draw, independent G ~ N(0, Sigma(r)),
// H ~ N(0, Sigma(s)); per frame the dual-face max along (sqrt(delta) G,
// sqrt(1-delta) H); weighted mean times the chain-rule prefactor
// (1/p)*IW_p^{1-p}(r,s).
LimitSampleSet iprw_alt_limit_sampler(const ProbVector& r, const ProbVector& s, const GroundSpace& space, double p,
                                      const ProjectionSet& proj, double delta, int draws, Rng rng);

}  // namespace projwass
