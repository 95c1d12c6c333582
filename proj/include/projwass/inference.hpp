#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "projwass/measures.hpp"
#include "projwass/projections.hpp"
#include "projwass/prw.hpp"

namespace projwass {

// Replacement count for the l-out-of-n bootstrap.
enum class EllRule { naive_n, n_four_fifths, n_two_thirds, n_half, explicit_ell };

struct BootstrapConfig {
  EllRule rule = EllRule::n_two_thirds;
  int explicit_ell = 0;  // only read when rule == explicit_ell
  int B = 500;
  std::uint64_t seed = 0;
  bool centered = false;
  // Confidence intervals only: use raw replicate quantiles (no sqrt(l/2)
  // rescaling, no centering) instead of the centered rescaled statistic.
  bool literal_uncentered = false;
};

// l = floor(n^exponent), at least 1. The explicit rule passes explicit_ell
// through after validating 1 <= l <= n.
int replacement_schedule(int n, EllRule rule, int explicit_ell = 0);

// B replicate values of the rescaled bootstrap: draw l indices i.i.d. from
// each empirical measure, re-bin, and emit sqrt(l/2)*stat(r*,s*) (uncentered)
// or sqrt(l/2)*(stat(r*,s*) - stat(r_n,s_m)) (centered). l is derived from
// min(n_x, n_y). Per-replicate RNG streams are derived from config.seed, so
// the multiset of replicates is independent of evaluation order.
std::vector<double> rescaled_bootstrap(const std::function<double(const ProbVector&, const ProbVector&)>& statistic,
                                       const std::vector<int>& samples_x, const std::vector<int>& samples_y,
                                       const GroundSpace& space, const BootstrapConfig& config);

struct TestReport {
  double statistic = 0.0;       // sqrt(nm/(n+m)) * IW_p(r_n, s_m)
  double critical_value = 0.0;  // (1-alpha)-quantile of uncentered replicates
  double p_value = 1.0;
  bool reject = false;
  double alpha = 0.0;
  int ell = 0;
  int B = 0;
  int T = 0;  // projection frame count
  std::uint64_t seed = 0;
  std::string warning;  // nonempty when the replacement rule is not sublinear
};

// Two-sample equality test calibrated by the uncentered rescaled bootstrap.
// reject iff statistic > critical_value; p-value uses the add-one correction
// (1 + #{replicate >= statistic}) / (1 + B).
TestReport sliced_two_sample_test(const std::vector<int>& samples_x, const std::vector<int>& samples_y,
                                  const GroundSpace& space, double p, const ProjectionSet& proj, double alpha,
                                  const BootstrapConfig& config);

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.0;  // 1 - alpha
  double point_estimate = 0.0;
  std::string method;
};

// Bootstrap confidence interval for PW_{p,lambda}: with q_a the empirical
// a-quantile of the centered replicates, C = [PW - sqrt((n+m)/nm) q_{1-a/2},
// PW - sqrt((n+m)/nm) q_{a/2}]. config.literal_uncentered switches q to raw
// uncentered replicate quantiles.
ConfidenceInterval prw_confidence_interval(const std::vector<int>& samples_x, const std::vector<int>& samples_y,
                                           const GroundSpace& space, double p, double lambda, int k, double alpha,
                                           const BootstrapConfig& config, const PrwOptions& prw_opts = {});

}  // namespace projwass
