#include "projwass/iprw.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "projwass/errors.hpp"

namespace projwass {

namespace {

double pow_p(double base, double p) {
  if (p == 1.0) return base;
  if (p == 2.0) return base * base;
  return std::pow(base, p);
}

double root_p(double value, double p) {
  value = std::max(value, 0.0);
  return (p == 1.0) ? value : std::pow(value, 1.0 / p);
}

template <typename F>
auto with_frame_annotation(int t, F&& f) -> decltype(f()) {
  const auto tag = [&](const char* what) { return "frame " + std::to_string(t) + ": " + what; };
  try {
    return f();
  } catch (const input_error& e) {
    throw input_error(tag(e.what()));
  } catch (const convergence_error& e) {
    throw convergence_error(tag(e.what()));
  } catch (const internal_error& e) {
    throw internal_error(tag(e.what()));
  }
}

// Per-frame working data. For k = 1 the merged support is additionally
// sorted and the map composed with the sort, so weights and directions pushed
// through `map` land in ascending-coordinate order.
struct FrameContext {
  std::vector<int> map;
  int merged = 0;
  bool one_d = false;
  Eigen::VectorXd sorted_pts;  // k = 1
  Eigen::VectorXd gap_pow;     // k = 1: (x_{t+1} - x_t)^p
  Eigen::MatrixXd cost;        // built on demand
};

FrameContext make_frame_context(const GroundSpace& space, const StiefelFrame& E, double p, bool need_cost) {
  const ProjectedSpace ps = project_support(space, E, 1e-12);
  FrameContext fc;
  fc.merged = ps.merged_count();
  fc.one_d = (E.k() == 1);
  const int M = fc.merged;
  if (fc.one_d) {
    std::vector<int> order(M);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return ps.points(0, a) < ps.points(0, b); });
    std::vector<int> rank(M);
    fc.sorted_pts.resize(M);
    for (int pos = 0; pos < M; ++pos) {
      rank[order[pos]] = pos;
      fc.sorted_pts[pos] = ps.points(0, order[pos]);
    }
    fc.map.resize(ps.merge_map.size());
    for (std::size_t i = 0; i < ps.merge_map.size(); ++i) fc.map[i] = rank[ps.merge_map[i]];
    fc.gap_pow.resize(std::max(M - 1, 0));
    for (int t = 0; t + 1 < M; ++t) fc.gap_pow[t] = pow_p(fc.sorted_pts[t + 1] - fc.sorted_pts[t], p);
    if (need_cost) {
      fc.cost = Eigen::MatrixXd::Zero(M, M);
      for (int a = 0; a < M; ++a) {
        for (int b = a + 1; b < M; ++b) {
          const double c = pow_p(std::abs(fc.sorted_pts[a] - fc.sorted_pts[b]), p);
          fc.cost(a, b) = c;
          fc.cost(b, a) = c;
        }
      }
    }
  } else {
    fc.map = ps.merge_map;
    if (need_cost) {
      fc.cost = Eigen::MatrixXd::Zero(M, M);
      for (int a = 0; a < M; ++a) {
        for (int b = a + 1; b < M; ++b) {
          const double c = pow_p((ps.points.col(a) - ps.points.col(b)).norm(), p);
          fc.cost(a, b) = c;
          fc.cost(b, a) = c;
        }
      }
    }
  }
  return fc;
}

Eigen::VectorXd push_through(const std::vector<int>& map, int merged, const Eigen::VectorXd& w) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(merged);
  for (std::size_t i = 0; i < map.size(); ++i) out[map[i]] += w[static_cast<Eigen::Index>(i)];
  return out;
}

void validate_common(const ProbVector& r, const GroundSpace& space, double p, const ProjectionSet& proj) {
  if (r.size() != space.N()) throw input_error("weights must live on the given space");
  if (p < 1.0) throw input_error("p must be >= 1");
  if (proj.frames.empty() || proj.frames.front().d() != space.d()) {
    throw input_error("projection frames must match the space dimension");
  }
}

bool support_connected(const Eigen::MatrixXd& plan, double tol) {
  const int n = static_cast<int>(plan.rows());
  const int m = static_cast<int>(plan.cols());
  std::vector<char> seen_r(n, 0), seen_c(m, 0);
  std::vector<int> stack_r{0}, stack_c;
  seen_r[0] = 1;
  int seen = 1;
  while (!stack_r.empty() || !stack_c.empty()) {
    if (!stack_r.empty()) {
      const int i = stack_r.back();
      stack_r.pop_back();
      for (int j = 0; j < m; ++j) {
        if (!seen_c[j] && plan(i, j) > tol) {
          seen_c[j] = 1;
          ++seen;
          stack_c.push_back(j);
        }
      }
    } else {
      const int j = stack_c.back();
      stack_c.pop_back();
      for (int i = 0; i < n; ++i) {
        if (!seen_r[i] && plan(i, j) > tol) {
          seen_r[i] = 1;
          ++seen;
          stack_r.push_back(i);
        }
      }
    }
  }
  return seen == n + m;
}

}  // namespace

IprwEstimate iprw_distance(const ProbVector& r, const ProbVector& s, const GroundSpace& space, double p,
                           const ProjectionSet& proj) {
  validate_common(r, space, p, proj);
  if (s.size() != space.N()) throw input_error("weights must live on the given space");
  const int T = proj.size();
  IprwEstimate est;
  est.p = p;
  est.projection_set = &proj;
  est.per_frame_values.resize(T);
  double acc = 0.0;
  for (int t = 0; t < T; ++t) {
    const double v = with_frame_annotation(t, [&]() {
      FrameContext fc = make_frame_context(space, proj.frames[t], p, proj.frames[t].k() > 1);
      Eigen::VectorXd wr = push_through(fc.map, fc.merged, r.w);
      Eigen::VectorXd ws = push_through(fc.map, fc.merged, s.w);
      if (fc.one_d) {
        return wasserstein_1d(ProbVector{std::move(wr)}, ProbVector{std::move(ws)}, fc.sorted_pts, p);
      }
      return root_p(solve_transport(fc.cost, wr, ws).cost, p);
    });
    est.per_frame_values[t] = v;
    acc += proj.weights[t] * pow_p(v, p);
  }
  est.value = root_p(acc, p);
  return est;
}

double iprw_derivative(const ProbVector& r, const ProbVector& s, const GroundSpace& space, double p,
                       const ProjectionSet& proj, const DirectionVector& h1, const DirectionVector& h2) {
  validate_common(r, space, p, proj);
  if (s.size() != space.N() || h1.size() != space.N() || h2.size() != space.N()) {
    throw input_error("directions must live on the given space");
  }
  double acc = 0.0;
  for (int t = 0; t < proj.size(); ++t) {
    acc += proj.weights[t] * with_frame_annotation(t, [&]() {
      FrameContext fc = make_frame_context(space, proj.frames[t], p, true);
      const Eigen::VectorXd wr = push_through(fc.map, fc.merged, r.w);
      const Eigen::VectorXd ws = push_through(fc.map, fc.merged, s.w);
      const Eigen::VectorXd g1 = push_through(fc.map, fc.merged, h1.h);
      const Eigen::VectorXd g2 = push_through(fc.map, fc.merged, h2.h);
      const TransportSolution sol = solve_transport(fc.cost, wr, ws);
      return dual_face_max_cost(fc.cost, wr, ws, sol.cost, g1, g2);
    });
  }
  return acc;
}

LimitSampleSet iprw_null_limit_sampler(const ProbVector& r, const GroundSpace& space, double p,
                                       const ProjectionSet& proj, int draws, Rng rng) {
  validate_common(r, space, p, proj);
  if (draws < 1) throw input_error("limit sampler needs draws >= 1");
  const int T = proj.size();
  std::vector<FrameContext> ctx;
  ctx.reserve(T);
  for (int t = 0; t < T; ++t) {
    ctx.push_back(with_frame_annotation(
        t, [&]() { return make_frame_context(space, proj.frames[t], p, proj.frames[t].k() > 1); }));
  }
  GaussianSampler gauss(multinomial_covariance(r));

  LimitSampleSet out;
  out.regime = LimitSampleSet::Regime::null_regime;
  out.scaling_exponent = 1.0 / (2.0 * p);
  out.draws.reserve(static_cast<std::size_t>(draws));
  for (int d = 0; d < draws; ++d) {
    const Eigen::VectorXd G = gauss.draw(rng);
    double acc = 0.0;
    for (int t = 0; t < T; ++t) {
      const FrameContext& fc = ctx[t];
      const Eigen::VectorXd g = push_through(fc.map, fc.merged, G);
      const double val = fc.one_d ? null_cut_value(fc.gap_pow, g) : null_dual_max_cost(fc.cost, g);
      acc += proj.weights[t] * val;
    }
    out.draws.push_back(root_p(acc, p));
  }
  return out;
}

LimitSampleSet iprw_alt_limit_sampler(const ProbVector& r, const ProbVector& s, const GroundSpace& space, double p,
                                      const ProjectionSet& proj, double delta, int draws, Rng rng) {
  validate_common(r, space, p, proj);
  if (s.size() != space.N()) throw input_error("weights must live on the given space");
  if (!(delta > 0.0 && delta < 1.0)) throw input_error("delta must lie in (0,1)");
  if (draws < 1) throw input_error("limit sampler needs draws >= 1");

  const IprwEstimate est = iprw_distance(r, s, space, p, proj);
  if (est.value <= 0.0) {
    throw input_error("distributions coincide in every frame; the alternative-regime sampler needs IW_p > 0 "
                      "(use the null-regime sampler)");
  }
  const double prefactor = (p == 1.0) ? 1.0 : std::pow(est.value, 1.0 - p) / p;

  struct AltFrame {
    FrameContext fc;
    Eigen::VectorXd wr, ws;
    double power_cost = 0.0;
    bool singleton_face = false;  // positive-support graph connected
    Eigen::VectorXd u, v;
  };
  const int T = proj.size();
  std::vector<AltFrame> frames;
  frames.reserve(T);
  for (int t = 0; t < T; ++t) {
    frames.push_back(with_frame_annotation(t, [&]() {
      AltFrame af;
      af.fc = make_frame_context(space, proj.frames[t], p, true);
      af.wr = push_through(af.fc.map, af.fc.merged, r.w);
      af.ws = push_through(af.fc.map, af.fc.merged, s.w);
      TransportSolution sol = solve_transport(af.fc.cost, af.wr, af.ws);
      af.power_cost = sol.cost;
      af.singleton_face = support_connected(sol.plan, 1e-11);
      af.u = std::move(sol.u);
      af.v = std::move(sol.v);
      return af;
    }));
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
  for (int d = 0; d < draws; ++d) {
    const Eigen::VectorXd G = gauss_r.draw(rng);
    const Eigen::VectorXd H = gauss_s.draw(rng);
    double acc = 0.0;
    for (int t = 0; t < T; ++t) {
      const AltFrame& af = frames[t];
      Eigen::VectorXd g1 = sd * push_through(af.fc.map, af.fc.merged, G);
      Eigen::VectorXd g2 = sd1 * push_through(af.fc.map, af.fc.merged, H);
      // limit directions vanish on zero-mass atoms; zero out factorization noise
      for (int i = 0; i < af.fc.merged; ++i) {
        if (af.wr[i] <= 0.0) g1[i] = 0.0;
        if (af.ws[i] <= 0.0) g2[i] = 0.0;
      }
      const double val = af.singleton_face
                             ? af.u.dot(g1) + af.v.dot(g2)
                             : dual_face_max_cost(af.fc.cost, af.wr, af.ws, af.power_cost, g1, g2);
      acc += proj.weights[t] * val;
    }
    out.draws.push_back(prefactor * acc);
  }
  return out;
}

}  // namespace projwass
