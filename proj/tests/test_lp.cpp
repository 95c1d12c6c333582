#include <cmath>

#include <Eigen/Core>

#include "doctest.h"
#include "oracles.hpp"
#include "projwass/lp.hpp"
#include "projwass/rng.hpp"

using namespace projwass;

namespace {

// full optimality certificate for min c'x s.t. Ax = b, x >= 0: primal
// feasibility, dual feasibility y'A <= c', and a zero duality gap
void check_certificate(const LpResult& res, const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                       const Eigen::VectorXd& c, double tol = 1e-8) {
  REQUIRE(res.status == LpStatus::optimal);
  CHECK((A * res.x - b).cwiseAbs().maxCoeff() <= tol);
  CHECK(res.x.minCoeff() >= -tol);
  const Eigen::VectorXd reduced = c - A.transpose() * res.y;
  CHECK(reduced.minCoeff() >= -tol);
  CHECK(std::abs(c.dot(res.x) - res.value) <= tol * (1.0 + std::abs(res.value)));
  CHECK(std::abs(res.y.dot(b) - res.value) <= tol * (1.0 + std::abs(res.value)));
}

}  // namespace

TEST_SUITE("lp") {

TEST_CASE("a two-variable budget problem hits the known optimum") {
  // min -x1 - 2 x2 s.t. x1 + x2 + slack = 1
  Eigen::MatrixXd A(1, 3);
  A << 1.0, 1.0, 1.0;
  Eigen::VectorXd b(1), c(3);
  b << 1.0;
  c << -1.0, -2.0, 0.0;
  const LpResult res = solve_standard_lp(A, b, c);
  check_certificate(res, A, b, c);
  CHECK(res.value == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(res.x[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("negative right-hand sides are handled by row scaling") {
  // x1 - x2 = -3, x1 + x2 = 5 -> x = (1, 4)
  Eigen::MatrixXd A(2, 2);
  A << 1.0, -1.0, 1.0, 1.0;
  Eigen::VectorXd b(2), c(2);
  b << -3.0, 5.0;
  c << 1.0, 1.0;
  const LpResult res = solve_standard_lp(A, b, c);
  check_certificate(res, A, b, c);
  CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(res.x[1] == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("infeasible systems are reported as such") {
  Eigen::MatrixXd A(1, 1);
  A << 1.0;
  Eigen::VectorXd b(1), c(1);
  b << -1.0;  // x = -1 with x >= 0
  c << 1.0;
  CHECK(solve_standard_lp(A, b, c).status == LpStatus::infeasible);

  // contradictory pair: x1 + x2 = 1 and x1 + x2 = 2
  Eigen::MatrixXd A2(2, 2);
  A2 << 1.0, 1.0, 1.0, 1.0;
  Eigen::VectorXd b2(2), c2(2);
  b2 << 1.0, 2.0;
  c2 << 0.0, 0.0;
  CHECK(solve_standard_lp(A2, b2, c2).status == LpStatus::infeasible);
}

TEST_CASE("unbounded rays are detected") {
  // min -x1 s.t. x1 - x2 = 0: the ray x1 = x2 -> infinity drives the
  // objective to -infinity
  Eigen::MatrixXd A(1, 2);
  A << 1.0, -1.0;
  Eigen::VectorXd b(1), c(2);
  b << 0.0;
  c << -1.0, 0.0;
  CHECK(solve_standard_lp(A, b, c).status == LpStatus::unbounded);
}

TEST_CASE("duplicated rows leave the optimum unchanged") {
  Eigen::MatrixXd A(3, 3);
  A << 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 2.0;
  Eigen::VectorXd b(3), c(3);
  b << 1.0, 1.0, 0.5;
  c << 2.0, 1.0, 3.0;
  const LpResult res = solve_standard_lp(A, b, c);
  check_certificate(res, A, b, c);

  Eigen::MatrixXd A2(2, 3);
  A2 << 1.0, 1.0, 1.0, 0.0, 1.0, 2.0;
  Eigen::VectorXd b2(2);
  b2 << 1.0, 0.5;
  const LpResult res2 = solve_standard_lp(A2, b2, c);
  CHECK(res.value == doctest::Approx(res2.value).epsilon(1e-10));
}

TEST_CASE("heavily degenerate costs still terminate with a certificate") {
  // transportation structure with all costs equal: every vertex is optimal
  const int n = 4;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * n, n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      A(i, i * n + j) = 1.0;
      A(n + j, i * n + j) = 1.0;
    }
  }
  Eigen::VectorXd b(2 * n);
  b.setConstant(1.0 / n);
  b.head(n).setConstant(1.0 / n);
  Eigen::VectorXd c = Eigen::VectorXd::Constant(n * n, 3.0);
  const LpResult res = solve_standard_lp(A, b, c);
  REQUIRE(res.status == LpStatus::optimal);
  CHECK(res.value == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("random feasible instances always come back with a valid certificate") {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const int rows = 2 + static_cast<int>(rng.next_u64() % 3);
    const int cols = rows + 1 + static_cast<int>(rng.next_u64() % 4);
    Eigen::MatrixXd A(rows, cols);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) A(i, j) = 2.0 * rng.next_unit() - 1.0;
    }
    // construct b from a known nonnegative point so the instance is feasible
    Eigen::VectorXd x0(cols);
    for (int j = 0; j < cols; ++j) x0[j] = rng.next_unit();
    const Eigen::VectorXd b = A * x0;
    Eigen::VectorXd c(cols);
    for (int j = 0; j < cols; ++j) c[j] = rng.next_unit() + 0.1;  // positive costs keep it bounded below by 0
    const LpResult res = solve_standard_lp(A, b, c);
    check_certificate(res, A, b, c);
    CHECK(res.value <= c.dot(x0) + 1e-8);
  }
}

}  // TEST_SUITE
