#include "projwass/lp.hpp"

#include <cmath>
#include <vector>

#include "projwass/errors.hpp"

namespace projwass {

namespace {

constexpr double kPivotTol = 1e-11;

struct Tableau {
  Eigen::MatrixXd T;        // m x (n + m), structural columns then artificials
  Eigen::VectorXd rhs;      // kept nonnegative up to rounding
  Eigen::RowVectorXd red;   // reduced costs for the current phase
  std::vector<int> basis;   // column index basic in each row
  int m = 0, n = 0;

  void pivot(int r, int q) {
    const double piv = T(r, q);
    T.row(r) /= piv;
    rhs(r) /= piv;
    for (int i = 0; i < m; ++i) {
      if (i == r) continue;
      const double f = T(i, q);
      if (f != 0.0) {
        T.row(i) -= f * T.row(r);
        rhs(i) -= f * rhs(r);
        if (rhs(i) < 0.0 && rhs(i) > -1e-11) rhs(i) = 0.0;
      }
    }
    const double fr = red(q);
    if (fr != 0.0) red -= fr * T.row(r);
    basis[r] = q;
  }

  // returns false when no entering column remains (current phase optimal)
  bool iterate(bool phase_two, double red_tol, bool& bland, int& stall, bool& unbounded) {
    const int limit = phase_two ? n : n + m;
    int q = -1;
    if (bland) {
      for (int j = 0; j < limit; ++j) {
        if (red(j) < -red_tol) { q = j; break; }
      }
    } else {
      double best = -red_tol;
      for (int j = 0; j < limit; ++j) {
        if (red(j) < best) { best = red(j); q = j; }
      }
    }
    if (q < 0) return false;

    int r = -1;
    double best_ratio = 0.0;
    for (int i = 0; i < m; ++i) {
      const double a = T(i, q);
      if (a <= kPivotTol) continue;
      const double ratio = std::max(rhs(i), 0.0) / a;
      if (r < 0 || ratio < best_ratio - 1e-12 * (1.0 + best_ratio)) {
        r = i;
        best_ratio = ratio;
      } else if (ratio <= best_ratio + 1e-12 * (1.0 + best_ratio)) {
        // tie-break: Bland takes the smallest basic index, default the larger pivot
        if (bland ? (basis[i] < basis[r]) : (a > T(r, q))) r = i;
      }
    }
    if (r < 0) {
      unbounded = true;
      return false;
    }
    if (best_ratio <= 1e-13) {
      if (++stall > 100 + 5 * m) bland = true;
    } else {
      stall = 0;
    }
    pivot(r, q);
    return true;
  }
};

}  // namespace

LpResult solve_standard_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());

  Tableau tb;
  tb.m = m;
  tb.n = n;
  tb.T.resize(m, n + m);
  tb.rhs.resize(m);
  tb.basis.resize(m);
  Eigen::VectorXd flip = Eigen::VectorXd::Ones(m);
  for (int i = 0; i < m; ++i) {
    const double sign = b(i) < 0.0 ? -1.0 : 1.0;
    flip(i) = sign;
    tb.T.row(i).head(n) = sign * A.row(i);
    tb.rhs(i) = sign * b(i);
    tb.basis[i] = n + i;
  }
  tb.T.rightCols(m) = Eigen::MatrixXd::Identity(m, m);

  // phase 1: minimize the artificial mass
  tb.red.resize(n + m);
  for (int j = 0; j < n + m; ++j) {
    tb.red(j) = (j >= n ? 1.0 : 0.0) - tb.T.col(j).sum();
  }

  const double b_scale = 1.0 + tb.rhs.cwiseAbs().maxCoeff();
  const double c_scale = 1.0 + (n > 0 ? c.cwiseAbs().maxCoeff() : 0.0);
  const int iter_cap = 50000 + 100 * (m + n);

  bool bland = false, unbounded = false;
  int stall = 0, iters = 0;
  while (tb.iterate(false, 1e-10 * b_scale, bland, stall, unbounded)) {
    if (++iters > iter_cap) throw internal_error("simplex iteration cap exceeded in phase 1");
  }

  double art_mass = 0.0;
  for (int i = 0; i < m; ++i) {
    if (tb.basis[i] >= n) art_mass += std::max(tb.rhs(i), 0.0);
  }
  if (art_mass > 1e-8 * b_scale) {
    return LpResult{LpStatus::infeasible, 0.0, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(m)};
  }

  // drive zero-level artificials out where a structural pivot exists;
  // rows without one are redundant and keep their artificial at 0
  for (int i = 0; i < m; ++i) {
    if (tb.basis[i] < n) continue;
    for (int j = 0; j < n; ++j) {
      if (std::abs(tb.T(i, j)) > 1e-9) {
        tb.pivot(i, j);
        break;
      }
    }
  }

  // phase 2: reduced costs for the real objective, artificials barred
  auto cost_of = [&](int j) { return j < n ? c(j) : 0.0; };
  for (int j = 0; j < n + m; ++j) {
    double zj = 0.0;
    for (int i = 0; i < m; ++i) zj += cost_of(tb.basis[i]) * tb.T(i, j);
    tb.red(j) = cost_of(j) - zj;
  }

  bland = false;
  stall = 0;
  unbounded = false;
  while (tb.iterate(true, 1e-9 * c_scale, bland, stall, unbounded)) {
    if (++iters > iter_cap) throw internal_error("simplex iteration cap exceeded in phase 2");
  }
  if (unbounded) {
    return LpResult{LpStatus::unbounded, 0.0, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(m)};
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) {
    if (tb.basis[i] < n) x(tb.basis[i]) = std::max(tb.rhs(i), 0.0);
  }
  // y = c_B B^{-1}; the artificial block of the tableau is B^{-1} for the
  // sign-flipped rows, so undo the flips to report multipliers of A
  Eigen::VectorXd y(m);
  for (int i = 0; i < m; ++i) {
    double yi = 0.0;
    for (int k = 0; k < m; ++k) yi += cost_of(tb.basis[k]) * tb.T(k, n + i);
    y(i) = flip(i) * yi;
  }
  return LpResult{LpStatus::optimal, c.dot(x), std::move(x), std::move(y)};
}

}  // namespace projwass
