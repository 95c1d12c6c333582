#include "projwass/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "projwass/errors.hpp"
#include "projwass/lp.hpp"

namespace projwass {

namespace {

double pow_p(double base, double p) {
  if (p == 1.0) return base;
  if (p == 2.0) return base * base;
  return std::pow(base, p);
}

}  // namespace

CostVector cost_vector(const GroundSpace& space, double p) {
  if (p < 1.0) throw input_error("cost order p must be >= 1");
  const int N = space.N();
  Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N) * N);
  for (int i = 0; i < N; ++i) {
    for (int j = i + 1; j < N; ++j) {
      const double c = pow_p((space.points.col(i) - space.points.col(j)).norm(), p);
      e(static_cast<Eigen::Index>(i) * N + j) = c;
      e(static_cast<Eigen::Index>(j) * N + i) = c;
    }
  }
  return CostVector{std::move(e), p};
}

Eigen::MatrixXd cost_matrix(const GroundSpace& space, double p) {
  if (p < 1.0) throw input_error("cost order p must be >= 1");
  const int N = space.N();
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(N, N);
  for (int i = 0; i < N; ++i) {
    for (int j = i + 1; j < N; ++j) {
      const double c = pow_p((space.points.col(i) - space.points.col(j)).norm(), p);
      C(i, j) = c;
      C(j, i) = c;
    }
  }
  return C;
}

TransportSolution solve_transport(const Eigen::MatrixXd& C, Eigen::VectorXd a, Eigen::VectorXd b) {
  const int n = static_cast<int>(a.size());
  const int m = static_cast<int>(b.size());
  if (n < 1 || m < 1 || C.rows() != n || C.cols() != m) throw input_error("transport dimensions mismatch");
  if ((a.array() < -1e-12).any() || (b.array() < -1e-12).any()) throw input_error("transport marginals must be nonnegative");
  a = a.cwiseMax(0.0);
  b = b.cwiseMax(0.0);
  const double sa = a.sum();
  const double sb = b.sum();
  if (std::abs(sa - sb) > 1e-9 * std::max({1.0, sa, sb})) throw input_error("transport marginals must share total mass");

  TransportSolution out;
  out.plan = Eigen::MatrixXd::Zero(n, m);
  out.u = Eigen::VectorXd::Zero(n);
  out.v = Eigen::VectorXd::Zero(m);
  out.cost = 0.0;
  if (sa <= 0.0) return out;
  b *= sa / sb;

  const int V = n + m;
  const int nb = n + m - 1;
  std::vector<int> ai(nb), aj(nb);
  std::vector<double> fl(nb, 0.0);

  // northwest-corner initial basis: a spanning tree of exactly n+m-1 cells
  {
    Eigen::VectorXd ra = a, rb = b;
    int i = 0, j = 0;
    for (int t = 0; t < nb; ++t) {
      ai[t] = i;
      aj[t] = j;
      const double f = std::min(ra[i], rb[j]);
      fl[t] = f;
      ra[i] -= f;
      rb[j] -= f;
      if (t + 1 == nb) break;
      if ((ra[i] <= rb[j] && i + 1 < n) || j + 1 >= m) ++i; else ++j;
    }
  }

  std::vector<std::vector<int>> adj(V);
  auto rebuild_adj = [&]() {
    for (auto& L : adj) L.clear();
    for (int t = 0; t < nb; ++t) {
      adj[ai[t]].push_back(t);
      adj[n + aj[t]].push_back(t);
    }
  };

  Eigen::VectorXd u(n), v(m);
  std::vector<char> seen(V, 0);
  std::vector<int> order;
  order.reserve(V);
  auto compute_potentials = [&]() {
    std::fill(seen.begin(), seen.end(), 0);
    order.clear();
    seen[0] = 1;
    u[0] = 0.0;
    order.push_back(0);
    for (std::size_t head = 0; head < order.size(); ++head) {
      const int x = order[head];
      for (int t : adj[x]) {
        const int other = (x < n) ? n + aj[t] : ai[t];
        if (seen[other]) continue;
        seen[other] = 1;
        if (other >= n) v[other - n] = C(ai[t], aj[t]) - u[ai[t]];
        else u[other] = C(ai[t], aj[t]) - v[aj[t]];
        order.push_back(other);
      }
    }
    if (static_cast<int>(order.size()) != V) throw internal_error("transport basis lost connectivity");
  };

  std::vector<int> parent_node(V), parent_arc(V), queue;
  queue.reserve(V);
  std::vector<int> path;
  auto find_path = [&](int src, int dst) {
    std::fill(seen.begin(), seen.end(), 0);
    queue.clear();
    queue.push_back(src);
    seen[src] = 1;
    for (std::size_t head = 0; head < queue.size() && !seen[dst]; ++head) {
      const int x = queue[head];
      for (int t : adj[x]) {
        const int other = (x < n) ? n + aj[t] : ai[t];
        if (seen[other]) continue;
        seen[other] = 1;
        parent_node[other] = x;
        parent_arc[other] = t;
        queue.push_back(other);
      }
    }
    path.clear();
    for (int x = dst; x != src; x = parent_node[x]) path.push_back(parent_arc[x]);
    std::reverse(path.begin(), path.end());
  };

  rebuild_adj();
  const double tol = 1e-11 * (1.0 + C.cwiseAbs().maxCoeff());
  const double theta_eps = 1e-14 * (1.0 + sa);
  const int iter_cap = 100000 + 200 * V;
  bool bland = false;
  int stall = 0;

  for (int iter = 0;; ++iter) {
    if (iter > iter_cap) {
      throw internal_error("transport simplex exceeded its iteration cap before reaching optimality");
    }
    compute_potentials();
    int ei = -1, ej = -1;
    if (bland) {
      for (int i = 0; i < n && ei < 0; ++i) {
        for (int j = 0; j < m; ++j) {
          if (C(i, j) - u[i] - v[j] < -tol) { ei = i; ej = j; break; }
        }
      }
    } else {
      double best = -tol;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
          const double red = C(i, j) - u[i] - v[j];
          if (red < best) { best = red; ei = i; ej = j; }
        }
      }
    }
    if (ei < 0) break;

    // cycle = entering cell + tree path from its row to its column;
    // even path positions share a marginal with the entering cell (-theta)
    find_path(ei, n + ej);
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leave_pos = 0;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      if (fl[path[k]] <= theta) { theta = fl[path[k]]; leave_pos = k; }
    }
    for (std::size_t k = 0; k < path.size(); ++k) {
      fl[path[k]] += (k % 2 == 0) ? -theta : theta;
      if (fl[path[k]] < 0.0) fl[path[k]] = 0.0;
    }
    const int lv = path[leave_pos];
    ai[lv] = ei;
    aj[lv] = ej;
    fl[lv] = theta;
    rebuild_adj();
    if (theta <= theta_eps) {
      if (++stall > 50 + 5 * V) bland = true;
    } else {
      stall = 0;
      bland = false;
    }
  }

  // refresh flows exactly from the final tree by leaf elimination so the
  // marginal residual is at rounding level
  {
    std::vector<double> net(V);
    for (int i = 0; i < n; ++i) net[i] = a[i];
    for (int j = 0; j < m; ++j) net[n + j] = -b[j];
    std::vector<int> deg(V);
    std::vector<char> arc_done(nb, 0);
    std::vector<int> stack;
    for (int x = 0; x < V; ++x) {
      deg[x] = static_cast<int>(adj[x].size());
      if (deg[x] == 1) stack.push_back(x);
    }
    while (!stack.empty()) {
      const int x = stack.back();
      stack.pop_back();
      int arc = -1;
      for (int t : adj[x]) {
        if (!arc_done[t]) { arc = t; break; }
      }
      if (arc < 0) continue;
      arc_done[arc] = 1;
      const int other = (x < n) ? n + aj[arc] : ai[arc];
      double f;
      if (x < n) {
        f = net[x];
        net[x] = 0.0;
        net[other] += f;
      } else {
        f = -net[x];
        net[x] = 0.0;
        net[other] -= f;
      }
      fl[arc] = std::max(f, 0.0);
      if (--deg[other] == 1) stack.push_back(other);
    }
  }

  for (int t = 0; t < nb; ++t) out.plan(ai[t], aj[t]) += fl[t];
  out.u = u;
  out.v = v;
  out.cost = (C.array() * out.plan.array()).sum();
  return out;
}

WassersteinResult wasserstein_lp(const ProbVector& r, const ProbVector& s, const GroundSpace& space, double p) {
  const int N = space.N();
  if (r.size() != N || s.size() != N) throw input_error("weights must live on the given space");
  const Eigen::MatrixXd C = cost_matrix(space, p);
  TransportSolution sol = solve_transport(C, r.w, s.w);

  WassersteinResult res;
  res.power_value = std::max(sol.cost, 0.0);
  res.value = (p == 1.0) ? res.power_value : std::pow(res.power_value, 1.0 / p);
  res.plan.entries.resize(static_cast<Eigen::Index>(N) * N);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) res.plan.entries(static_cast<Eigen::Index>(i) * N + j) = sol.plan(i, j);
  }
  res.plan.value = res.power_value;
  const double shift = sol.u(N - 1);
  res.dual.u = sol.u.array() - shift;
  res.dual.v = sol.v.array() + shift;
  return res;
}

double wasserstein_1d(const ProbVector& r, const ProbVector& s, const Eigen::VectorXd& points, double p) {
  const int N = static_cast<int>(points.size());
  if (r.size() != N || s.size() != N) throw input_error("weights must align with the point list");
  if (p < 1.0) throw input_error("p must be >= 1");
  for (int i = 0; i + 1 < N; ++i) {
    if (!(points[i] < points[i + 1])) throw input_error("1-D support must be strictly increasing");
  }

  double t = 0.0, acc = 0.0;
  int i = 0, j = 0;
  double cr = r.w[0], cs = s.w[0];
  while (true) {
    const double tn = std::min(1.0, std::min(cr, cs));
    if (tn > t) {
      acc += (tn - t) * pow_p(std::abs(points[i] - points[j]), p);
      t = tn;
    }
    if (t >= 1.0 - 1e-15) break;
    if (cr <= cs && i + 1 < N) {
      ++i;
      cr += r.w[i];
    } else if (j + 1 < N) {
      ++j;
      cs += s.w[j];
    } else if (i + 1 < N) {
      ++i;
      cr += r.w[i];
    } else {
      break;
    }
  }
  return (p == 1.0) ? acc : std::pow(acc, 1.0 / p);
}

double dual_face_max_cost(const Eigen::MatrixXd& C, const Eigen::VectorXd& r, const Eigen::VectorXd& s,
                          double power_cost, const Eigen::VectorXd& h1, const Eigen::VectorXd& h2) {
  const int N = static_cast<int>(r.size());
  if (s.size() != N || h1.size() != N || h2.size() != N || C.rows() != N || C.cols() != N) {
    throw input_error("dual face LP dimensions mismatch");
  }
  // LP dual of the face maximization: min <C,q> - W*tau over q >= 0, tau >= 0
  // with marginals(q) = (h1, h2) + tau*(r, s); the last row-marginal
  // constraint is dropped, which pins u_N = 0 in the recovered face point.
  const int rows = 2 * N - 1;
  const Eigen::Index nn = static_cast<Eigen::Index>(N) * N;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, nn + 1);
  Eigen::VectorXd bvec(rows), cvec(nn + 1);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const Eigen::Index col = static_cast<Eigen::Index>(i) * N + j;
      if (i < N - 1) A(i, col) = 1.0;
      A(N - 1 + j, col) = 1.0;
      cvec(col) = C(i, j);
    }
  }
  for (int i = 0; i < N - 1; ++i) {
    A(i, nn) = -r(i);
    bvec(i) = h1(i);
  }
  for (int j = 0; j < N; ++j) {
    A(N - 1 + j, nn) = -s(j);
    bvec(N - 1 + j) = h2(j);
  }
  cvec(nn) = -power_cost;

  const LpResult res = solve_standard_lp(A, bvec, cvec);
  if (res.status != LpStatus::optimal) {
    throw internal_error("dual face LP unbounded: direction does not vanish on zero-mass atoms");
  }
  return res.value;
}

double dual_face_max(const ProbVector& r, const ProbVector& s, const GroundSpace& space, double p,
                     const DirectionVector& h1, const DirectionVector& h2) {
  const int N = space.N();
  if (r.size() != N || s.size() != N || h1.size() != N || h2.size() != N) {
    throw input_error("dual face inputs must live on the given space");
  }
  const Eigen::MatrixXd C = cost_matrix(space, p);
  const TransportSolution sol = solve_transport(C, r.w, s.w);
  return dual_face_max_cost(C, r.w, s.w, sol.cost, h1.h, h2.h);
}

double null_cut_value(const Eigen::VectorXd& gap_pow, const Eigen::VectorXd& g_sorted) {
  double run = 0.0, acc = 0.0;
  for (Eigen::Index t = 0; t < gap_pow.size(); ++t) {
    run += g_sorted[t];
    acc += std::abs(run) * gap_pow[t];
  }
  return acc;
}

double null_dual_max_cost(const Eigen::MatrixXd& C, const Eigen::VectorXd& g) {
  const int N = static_cast<int>(g.size());
  if (C.rows() != N || C.cols() != N) throw input_error("null dual LP dimensions mismatch");
  if (N == 1) return 0.0;
  // LP dual: min <C,f> over flows f >= 0 with net outflow g_i at every node;
  // the last balance row is dropped, pinning u_N = 0.
  const Eigen::Index nn = static_cast<Eigen::Index>(N) * N;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N - 1, nn);
  Eigen::VectorXd cvec = Eigen::VectorXd::Zero(nn);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      if (i == j) continue;
      const Eigen::Index col = static_cast<Eigen::Index>(i) * N + j;
      cvec(col) = C(i, j);
      if (i < N - 1) A(i, col) += 1.0;
      if (j < N - 1) A(j, col) -= 1.0;
    }
  }
  const LpResult res = solve_standard_lp(A, g.head(N - 1), cvec);
  if (res.status != LpStatus::optimal) throw internal_error("null dual LP failed; flow problem should always be solvable");
  return res.value;
}

double null_dual_max(const GroundSpace& space, double p, const Eigen::VectorXd& g) {
  const int N = space.N();
  if (static_cast<int>(g.size()) != N) throw input_error("direction length must match the space");
  if (std::abs(g.sum()) > 1e-9) throw input_error("direction must sum to 0");
  if (N == 1) return 0.0;
  if (space.d() == 1) {
    std::vector<int> order(N);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) { return space.points(0, x) < space.points(0, y); });
    Eigen::VectorXd gaps(N - 1), gs(N - 1);
    for (int t = 0; t < N - 1; ++t) {
      gaps(t) = pow_p(space.points(0, order[t + 1]) - space.points(0, order[t]), p);
      gs(t) = g(order[t]);
    }
    return null_cut_value(gaps, gs);
  }
  return null_dual_max_cost(cost_matrix(space, p), g);
}

}  // namespace projwass
