#include "projwass/inference.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "projwass/errors.hpp"
#include "projwass/iprw.hpp"
#include "projwass/rng.hpp"

namespace projwass {

namespace {

// x-th order statistic with x = ceil(level * B), clamped to [1, B]
double empirical_quantile(std::vector<double> values, double level) {
  if (values.empty()) throw input_error("quantile of an empty replicate set");
  const int B = static_cast<int>(values.size());
  int idx = static_cast<int>(std::ceil(level * B));
  idx = std::clamp(idx, 1, B);
  std::nth_element(values.begin(), values.begin() + (idx - 1), values.end());
  return values[idx - 1];
}

std::vector<double> cumulative_weights(const ProbVector& w) {
  std::vector<double> cum(static_cast<std::size_t>(w.size()));
  double acc = 0.0;
  for (int i = 0; i < w.size(); ++i) {
    acc += w.w[i];
    cum[static_cast<std::size_t>(i)] = acc;
  }
  cum.back() = std::max(cum.back(), 1.0);  // guard the final bin against rounding
  return cum;
}

ProbVector resample(const std::vector<double>& cum, int ell, int N, Rng& rng) {
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(N);
  for (int i = 0; i < ell; ++i) counts[rng.categorical(cum)] += 1.0;
  return ProbVector{counts / static_cast<double>(ell)};
}

}  // namespace

int replacement_schedule(int n, EllRule rule, int explicit_ell) {
  if (n < 1) throw input_error("sample size must be >= 1");
  double exponent = 1.0;
  switch (rule) {
    case EllRule::naive_n:
      return n;
    case EllRule::n_four_fifths:
      exponent = 4.0 / 5.0;
      break;
    case EllRule::n_two_thirds:
      exponent = 2.0 / 3.0;
      break;
    case EllRule::n_half:
      exponent = 1.0 / 2.0;
      break;
    case EllRule::explicit_ell:
      if (explicit_ell < 1 || explicit_ell > n) throw input_error("explicit replacement count must satisfy 1 <= l <= n");
      return explicit_ell;
    default:
      throw input_error("unknown replacement rule");
  }
  // the small shift keeps exact powers (e.g. 1000^(2/3)) from flooring down
  const int ell = static_cast<int>(std::floor(std::pow(static_cast<double>(n), exponent) + 1e-9));
  return std::max(ell, 1);
}

std::vector<double> rescaled_bootstrap(const std::function<double(const ProbVector&, const ProbVector&)>& statistic,
                                       const std::vector<int>& samples_x, const std::vector<int>& samples_y,
                                       const GroundSpace& space, const BootstrapConfig& config) {
  if (config.B < 0) throw input_error("replicate count must be >= 0");
  const int n = static_cast<int>(samples_x.size());
  const int m = static_cast<int>(samples_y.size());
  if (n < 1 || m < 1) throw input_error("both samples must be nonempty");

  const ProbVector rn = empirical_distribution(samples_x, space);
  const ProbVector sm = empirical_distribution(samples_y, space);
  const int ell = replacement_schedule(std::min(n, m), config.rule, config.explicit_ell);
  const double scale = std::sqrt(ell / 2.0);
  const double center = config.centered ? statistic(rn, sm) : 0.0;

  const std::vector<double> cum_r = cumulative_weights(rn);
  const std::vector<double> cum_s = cumulative_weights(sm);
  const Rng base(config.seed);

  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(config.B));
  for (int b = 0; b < config.B; ++b) {
    Rng rb = base.fold(static_cast<std::uint64_t>(b));
    const ProbVector rstar = resample(cum_r, ell, space.N(), rb);
    const ProbVector sstar = resample(cum_s, ell, space.N(), rb);
    out.push_back(scale * (statistic(rstar, sstar) - center));
  }
  return out;
}

TestReport sliced_two_sample_test(const std::vector<int>& samples_x, const std::vector<int>& samples_y,
                                  const GroundSpace& space, double p, const ProjectionSet& proj, double alpha,
                                  const BootstrapConfig& config) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw input_error("alpha must lie in (0,1)");
  if (config.B < 20) throw input_error("need at least 20 bootstrap replicates for a usable quantile");
  const int n = static_cast<int>(samples_x.size());
  const int m = static_cast<int>(samples_y.size());
  if (n < 1 || m < 1) throw input_error("both samples must be nonempty");

  const ProbVector rn = empirical_distribution(samples_x, space);
  const ProbVector sm = empirical_distribution(samples_y, space);

  const auto statistic = [&](const ProbVector& a, const ProbVector& b) {
    return iprw_distance(a, b, space, p, proj).value;
  };

  TestReport report;
  report.alpha = alpha;
  report.B = config.B;
  report.T = proj.size();
  report.seed = config.seed;
  report.ell = replacement_schedule(std::min(n, m), config.rule, config.explicit_ell);
  if (report.ell >= std::min(n, m)) {
    report.warning = "replacement count equals the sample size; the naive bootstrap is inconsistent in the "
                     "null regime";
  }

  const double nd = static_cast<double>(n), md = static_cast<double>(m);
  report.statistic = std::sqrt(nd * md / (nd + md)) * statistic(rn, sm);

  BootstrapConfig uncentered = config;
  uncentered.centered = false;
  const std::vector<double> reps = rescaled_bootstrap(statistic, samples_x, samples_y, space, uncentered);

  report.critical_value = empirical_quantile(reps, 1.0 - alpha);
  int count_ge = 0;
  for (double v : reps) {
    if (v >= report.statistic) ++count_ge;
  }
  report.p_value = (1.0 + count_ge) / (1.0 + config.B);
  report.reject = report.statistic > report.critical_value;
  return report;
}

ConfidenceInterval prw_confidence_interval(const std::vector<int>& samples_x, const std::vector<int>& samples_y,
                                           const GroundSpace& space, double p, double lambda, int k, double alpha,
                                           const BootstrapConfig& config, const PrwOptions& prw_opts) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw input_error("alpha must lie in (0,1)");
  if (config.B < 20) throw input_error("need at least 20 bootstrap replicates for a usable quantile");
  const int n = static_cast<int>(samples_x.size());
  const int m = static_cast<int>(samples_y.size());
  if (n < 1 || m < 1) throw input_error("both samples must be nonempty");

  const auto statistic = [&](const ProbVector& a, const ProbVector& b) {
    return prw_regularized(a, b, space, p, lambda, k, prw_opts).value;
  };

  const ProbVector rn = empirical_distribution(samples_x, space);
  const ProbVector sm = empirical_distribution(samples_y, space);
  const double point = statistic(rn, sm);

  BootstrapConfig cfg = config;
  cfg.centered = !config.literal_uncentered;
  std::vector<double> reps = rescaled_bootstrap(statistic, samples_x, samples_y, space, cfg);
  if (config.literal_uncentered) {
    const int ell = replacement_schedule(std::min(n, m), config.rule, config.explicit_ell);
    const double scale = std::sqrt(ell / 2.0);
    for (double& v : reps) v /= scale;
  }

  const double q_lo = empirical_quantile(reps, alpha / 2.0);
  const double q_hi = empirical_quantile(reps, 1.0 - alpha / 2.0);
  const double width_scale = std::sqrt((static_cast<double>(n) + m) / (static_cast<double>(n) * m));

  ConfidenceInterval ci;
  ci.level = 1.0 - alpha;
  ci.point_estimate = point;
  ci.lower = point - width_scale * q_hi;
  ci.upper = point - width_scale * q_lo;
  std::ostringstream method;
  method << (config.literal_uncentered ? "uncentered raw replicate quantiles" : "centered rescaled replicate quantiles")
         << ", l=" << replacement_schedule(std::min(n, m), config.rule, config.explicit_ell) << ", B=" << config.B;
  ci.method = method.str();
  return ci;
}

}  // namespace projwass
