#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "doctest.h"
#include "oracles.hpp"
#include "projwass/entropic.hpp"
#include "projwass/errors.hpp"
#include "projwass/inference.hpp"
#include "projwass/iprw.hpp"
#include "projwass/measures.hpp"
#include "projwass/prw.hpp"
#include "projwass/rng.hpp"

using namespace projwass;

namespace {

// x-th order statistic with x = ceil(level*B), the convention the bootstrap
// quantiles document; reimplemented independently via full sorting
double sorted_quantile(std::vector<double> values, double level) {
  std::sort(values.begin(), values.end());
  const int B = static_cast<int>(values.size());
  int idx = static_cast<int>(std::ceil(level * B));
  idx = std::max(1, std::min(idx, B));
  return values[static_cast<std::size_t>(idx - 1)];
}

// draws 1-based support indices from the weights
std::vector<int> draw_indices(const ProbVector& w, int count, Rng& rng) {
  std::vector<double> cum(static_cast<std::size_t>(w.size()));
  double acc = 0.0;
  for (int i = 0; i < w.size(); ++i) {
    acc += w.w[i];
    cum[static_cast<std::size_t>(i)] = acc;
  }
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(static_cast<int>(rng.categorical(cum)) + 1);
  return out;
}

GroundSpace line_space() {
  Eigen::MatrixXd pts(1, 4);
  pts << 0.0, 0.5, 1.2, 2.0;
  return GroundSpace::checked(pts);
}

GroundSpace plane_space() {
  Eigen::MatrixXd pts(2, 4);
  pts << 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0;
  return GroundSpace::checked(pts);
}

double first_weight_gap(const ProbVector& a, const ProbVector& b) { return a.w[0] - b.w[0]; }

}  // namespace

TEST_SUITE("inference") {

TEST_CASE("replacement schedules floor the published exponents") {
  CHECK(replacement_schedule(892, EllRule::n_four_fifths) == 229);
  CHECK(replacement_schedule(1000, EllRule::naive_n) == 1000);
  CHECK(replacement_schedule(1000, EllRule::n_four_fifths) == 251);
  CHECK(replacement_schedule(1000, EllRule::n_two_thirds) == 100);
  CHECK(replacement_schedule(1000, EllRule::n_half) == 31);
  CHECK(replacement_schedule(1, EllRule::naive_n) == 1);
  CHECK(replacement_schedule(1, EllRule::n_two_thirds) == 1);
  CHECK(replacement_schedule(2, EllRule::n_half) == 1);
  CHECK(replacement_schedule(10, EllRule::explicit_ell, 5) == 5);
  CHECK(replacement_schedule(10, EllRule::explicit_ell, 10) == 10);
  CHECK_THROWS_AS(replacement_schedule(10, EllRule::explicit_ell, 0), input_error);
  CHECK_THROWS_AS(replacement_schedule(10, EllRule::explicit_ell, 11), input_error);
  CHECK_THROWS_AS(replacement_schedule(0, EllRule::naive_n), input_error);
}

TEST_CASE("bootstrap replicates are reproducible and pair across centering") {
  const GroundSpace space = line_space();
  Rng rng(11);
  const ProbVector truth = oracles::random_simplex(4, rng);
  const std::vector<int> xs = draw_indices(truth, 40, rng);
  const std::vector<int> ys = draw_indices(truth, 40, rng);

  BootstrapConfig cfg;
  cfg.rule = EllRule::n_half;
  cfg.B = 64;
  cfg.seed = 5;

  const auto reps = rescaled_bootstrap(first_weight_gap, xs, ys, space, cfg);
  REQUIRE(reps.size() == 64);
  CHECK(rescaled_bootstrap(first_weight_gap, xs, ys, space, cfg) == reps);

  BootstrapConfig other = cfg;
  other.seed = 6;
  CHECK(rescaled_bootstrap(first_weight_gap, xs, ys, space, other) != reps);

  // the centered replicate b uses the same resample as the uncentered one
  BootstrapConfig centered = cfg;
  centered.centered = true;
  const auto reps_c = rescaled_bootstrap(first_weight_gap, xs, ys, space, centered);
  const ProbVector rn = empirical_distribution(xs, space);
  const ProbVector sm = empirical_distribution(ys, space);
  const int ell = replacement_schedule(40, EllRule::n_half);
  const double shift = std::sqrt(ell / 2.0) * first_weight_gap(rn, sm);
  for (std::size_t b = 0; b < reps.size(); ++b) {
    CHECK(reps_c[b] == doctest::Approx(reps[b] - shift).epsilon(1e-12));
  }

  BootstrapConfig empty = cfg;
  empty.B = 0;
  CHECK(rescaled_bootstrap(first_weight_gap, xs, ys, space, empty).empty());
  CHECK_THROWS_AS(rescaled_bootstrap(first_weight_gap, {}, ys, space, cfg), input_error);
}

TEST_CASE("the replacement count follows the smaller sample") {
  const GroundSpace space = line_space();
  Rng rng(21);
  const ProbVector truth = oracles::random_simplex(4, rng);
  const std::vector<int> xs = draw_indices(truth, 9, rng);
  const std::vector<int> ys = draw_indices(truth, 100, rng);

  BootstrapConfig cfg;
  cfg.rule = EllRule::n_half;  // l = floor(sqrt(9)) = 3
  cfg.B = 200;
  cfg.seed = 2;
  const double scale = std::sqrt(3.0 / 2.0);
  // with l = 3 both resampled weights live on the 1/3 grid, so every
  // replicate is scale * (integer / 3); an l taken from the larger sample
  // would put the second factor on a 1/100 grid instead
  for (double rep : rescaled_bootstrap(first_weight_gap, xs, ys, space, cfg)) {
    const double units = rep / scale * 3.0;
    CHECK(std::abs(units - std::round(units)) <= 1e-9);
  }
}

TEST_CASE("identical samples never reject") {
  const GroundSpace space = plane_space();
  Rng rng(31);
  const ProbVector truth = oracles::random_simplex(4, rng);
  const std::vector<int> xs = draw_indices(truth, 60, rng);
  const ProjectionSet proj = ProjectionSet::uniform_monte_carlo(2, 1, 4, Rng(8));

  BootstrapConfig cfg;
  cfg.B = 40;
  cfg.seed = 3;
  const TestReport report = sliced_two_sample_test(xs, xs, space, 2.0, proj, 0.05, cfg);
  CHECK(report.statistic == 0.0);
  CHECK(!report.reject);
  CHECK(report.p_value == 1.0);
  CHECK(report.alpha == 0.05);
  CHECK(report.B == 40);
  CHECK(report.T == 4);
  CHECK(report.seed == 3);
  CHECK(report.ell == replacement_schedule(60, EllRule::n_two_thirds));
  CHECK(report.warning.empty());
}

TEST_CASE("the naive replacement rule carries a warning") {
  const GroundSpace space = plane_space();
  Rng rng(41);
  const ProbVector truth = oracles::random_simplex(4, rng);
  const std::vector<int> xs = draw_indices(truth, 50, rng);
  const std::vector<int> ys = draw_indices(truth, 50, rng);
  const ProjectionSet proj = ProjectionSet::uniform_monte_carlo(2, 1, 4, Rng(9));

  BootstrapConfig cfg;
  cfg.B = 30;
  cfg.rule = EllRule::naive_n;
  CHECK(!sliced_two_sample_test(xs, ys, space, 2.0, proj, 0.05, cfg).warning.empty());
  cfg.rule = EllRule::explicit_ell;
  cfg.explicit_ell = 50;
  CHECK(!sliced_two_sample_test(xs, ys, space, 2.0, proj, 0.05, cfg).warning.empty());
  cfg.explicit_ell = 12;
  CHECK(sliced_two_sample_test(xs, ys, space, 2.0, proj, 0.05, cfg).warning.empty());
}

TEST_CASE("test wiring matches the bootstrap quantile contract") {
  const GroundSpace space = plane_space();
  Rng rng(51);
  const ProbVector pr = oracles::random_simplex(4, rng);
  const ProbVector ps = oracles::random_simplex(4, rng);
  const std::vector<int> xs = draw_indices(pr, 80, rng);
  const std::vector<int> ys = draw_indices(ps, 120, rng);
  const ProjectionSet proj = ProjectionSet::uniform_monte_carlo(2, 1, 6, Rng(10));
  const double alpha = 0.1;

  BootstrapConfig cfg;
  cfg.B = 50;
  cfg.seed = 17;
  cfg.rule = EllRule::n_two_thirds;
  const TestReport report = sliced_two_sample_test(xs, ys, space, 2.0, proj, alpha, cfg);

  const auto statistic = [&](const ProbVector& a, const ProbVector& b) {
    return iprw_distance(a, b, space, 2.0, proj).value;
  };
  const auto reps = rescaled_bootstrap(statistic, xs, ys, space, cfg);
  CHECK(report.critical_value == doctest::Approx(sorted_quantile(reps, 1.0 - alpha)).epsilon(1e-12));

  const ProbVector rn = empirical_distribution(xs, space);
  const ProbVector sm = empirical_distribution(ys, space);
  const double expected_stat = std::sqrt(80.0 * 120.0 / 200.0) * statistic(rn, sm);
  CHECK(report.statistic == doctest::Approx(expected_stat).epsilon(1e-12));

  int count_ge = 0;
  for (double v : reps) {
    if (v >= report.statistic) ++count_ge;
  }
  CHECK(report.p_value == doctest::Approx((1.0 + count_ge) / 51.0).epsilon(1e-12));
  CHECK(report.reject == (report.statistic > report.critical_value));
}

TEST_CASE("separated samples reject and shared samples do not") {
  const GroundSpace space = plane_space();
  Eigen::VectorXd wa(4), wb(4);
  wa << 0.7, 0.1, 0.1, 0.1;
  wb << 0.1, 0.1, 0.1, 0.7;
  const ProbVector pa = ProbVector::checked(wa);
  const ProbVector pb = ProbVector::checked(wb);
  Rng rng(61);
  const std::vector<int> xs = draw_indices(pa, 200, rng);
  const std::vector<int> ys_far = draw_indices(pb, 200, rng);
  const std::vector<int> ys_near = draw_indices(pa, 200, rng);
  const ProjectionSet proj = ProjectionSet::uniform_monte_carlo(2, 1, 8, Rng(12));

  BootstrapConfig cfg;
  cfg.B = 99;
  cfg.seed = 29;
  const TestReport far = sliced_two_sample_test(xs, ys_far, space, 2.0, proj, 0.05, cfg);
  CHECK(far.reject);
  CHECK(far.p_value <= 0.02);
  const TestReport near = sliced_two_sample_test(xs, ys_near, space, 2.0, proj, 0.05, cfg);
  CHECK(!near.reject);

  CHECK_THROWS_AS(sliced_two_sample_test(xs, ys_far, space, 2.0, proj, 0.0, cfg), input_error);
  CHECK_THROWS_AS(sliced_two_sample_test(xs, ys_far, space, 2.0, proj, 1.0, cfg), input_error);
  BootstrapConfig tiny = cfg;
  tiny.B = 19;
  CHECK_THROWS_AS(sliced_two_sample_test(xs, ys_far, space, 2.0, proj, 0.05, tiny), input_error);
}

TEST_CASE("confidence intervals are well formed and cover the truth") {
  const GroundSpace space = line_space();
  Eigen::VectorXd wr(4), ws(4);
  wr << 0.4, 0.1, 0.2, 0.3;
  ws << 0.1, 0.4, 0.3, 0.2;
  const ProbVector r = ProbVector::checked(wr);
  const ProbVector s = ProbVector::checked(ws);
  PrwOptions fast;
  fast.restarts = 2;
  const double truth = prw_regularized(r, s, space, 2.0, 1.0, 1, fast).value;
  REQUIRE(truth > 0.05);

  BootstrapConfig cfg;
  cfg.B = 200;
  cfg.rule = EllRule::n_two_thirds;

  Rng rng(71);
  int covered = 0;
  double width_sum = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const std::vector<int> xs = draw_indices(r, 400, rng);
    const std::vector<int> ys = draw_indices(s, 400, rng);
    cfg.seed = 100 + static_cast<std::uint64_t>(rep);
    const ConfidenceInterval ci = prw_confidence_interval(xs, ys, space, 2.0, 1.0, 1, 0.1, cfg, fast);
    CHECK(ci.lower <= ci.upper);
    CHECK(ci.level == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(ci.method.find("l=") != std::string::npos);
    CHECK(ci.method.find("B=200") != std::string::npos);
    const ProbVector rn = empirical_distribution(xs, space);
    const ProbVector sm = empirical_distribution(ys, space);
    CHECK(ci.point_estimate ==
          doctest::Approx(prw_regularized(rn, sm, space, 2.0, 1.0, 1, fast).value).epsilon(1e-12));
    if (ci.lower <= truth && truth <= ci.upper) ++covered;
    width_sum += ci.upper - ci.lower;
  }
  CHECK(covered >= 14);

  // quadrupling both samples roughly halves the interval
  double wide_sum = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const std::vector<int> xs = draw_indices(r, 100, rng);
    const std::vector<int> ys = draw_indices(s, 100, rng);
    cfg.seed = 300 + static_cast<std::uint64_t>(rep);
    const ConfidenceInterval ci = prw_confidence_interval(xs, ys, space, 2.0, 1.0, 1, 0.1, cfg, fast);
    wide_sum += ci.upper - ci.lower;
  }
  const double ratio = wide_sum / width_sum;
  CHECK(ratio > 1.3);
  CHECK(ratio < 3.0);
}

TEST_CASE("literal interval mode uses raw replicate quantiles") {
  const GroundSpace space = line_space();
  Rng rng(81);
  const ProbVector r = oracles::random_simplex(4, rng);
  const ProbVector s = oracles::random_simplex(4, rng);
  const std::vector<int> xs = draw_indices(r, 90, rng);
  const std::vector<int> ys = draw_indices(s, 90, rng);
  PrwOptions fast;
  fast.restarts = 2;

  BootstrapConfig cfg;
  cfg.B = 60;
  cfg.seed = 23;
  cfg.rule = EllRule::n_half;
  cfg.literal_uncentered = true;
  const ConfidenceInterval ci = prw_confidence_interval(xs, ys, space, 2.0, 1.0, 1, 0.1, cfg, fast);
  CHECK(ci.method.find("uncentered raw replicate quantiles") != std::string::npos);

  const auto statistic = [&](const ProbVector& a, const ProbVector& b) {
    return prw_regularized(a, b, space, 2.0, 1.0, 1, fast).value;
  };
  BootstrapConfig uncentered = cfg;
  uncentered.centered = false;
  uncentered.literal_uncentered = false;
  auto reps = rescaled_bootstrap(statistic, xs, ys, space, uncentered);
  const int ell = replacement_schedule(90, EllRule::n_half);
  for (double& v : reps) v /= std::sqrt(ell / 2.0);
  const ProbVector rn = empirical_distribution(xs, space);
  const ProbVector sm = empirical_distribution(ys, space);
  const double point = statistic(rn, sm);
  const double width_scale = std::sqrt(180.0 / (90.0 * 90.0));
  CHECK(ci.lower == doctest::Approx(point - width_scale * sorted_quantile(reps, 0.95)).epsilon(1e-12));
  CHECK(ci.upper == doctest::Approx(point - width_scale * sorted_quantile(reps, 0.05)).epsilon(1e-12));
  CHECK(ci.point_estimate == doctest::Approx(point).epsilon(1e-12));

  const ConfidenceInterval centered_ci = prw_confidence_interval(xs, ys, space, 2.0, 1.0, 1, 0.1,
                                                                 [&] {
                                                                   BootstrapConfig c = cfg;
                                                                   c.literal_uncentered = false;
                                                                   return c;
                                                                 }(),
                                                                 fast);
  CHECK(centered_ci.method.find("centered rescaled replicate quantiles") != std::string::npos);

  CHECK_THROWS_AS(prw_confidence_interval(xs, ys, space, 2.0, 1.0, 1, 0.0, cfg, fast), input_error);
  CHECK_THROWS_AS(prw_confidence_interval(xs, ys, space, 2.0, 1.0, 1, 1.0, cfg, fast), input_error);
  BootstrapConfig tiny = cfg;
  tiny.B = 10;
  CHECK_THROWS_AS(prw_confidence_interval(xs, ys, space, 2.0, 1.0, 1, 0.1, tiny, fast), input_error);
}

}  // TEST_SUITE
