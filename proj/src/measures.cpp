#include "projwass/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "projwass/errors.hpp"

namespace projwass {

GroundSpace GroundSpace::checked(Eigen::MatrixXd pts) {
  if (pts.cols() < 1 || pts.rows() < 1) throw input_error("ground space needs N >= 1 points in d >= 1 dimensions");
  const int N = static_cast<int>(pts.cols());
  std::vector<int> order(N);
  std::iota(order.begin(), order.end(), 0);
  auto lex_less = [&](int a, int b) {
    for (int r = 0; r < pts.rows(); ++r) {
      if (pts(r, a) != pts(r, b)) return pts(r, a) < pts(r, b);
    }
    return false;
  };
  std::sort(order.begin(), order.end(), lex_less);
  for (int i = 0; i + 1 < N; ++i) {
    if (pts.col(order[i]) == pts.col(order[i + 1])) {
      throw input_error("ground space points must be pairwise distinct");
    }
  }
  return GroundSpace{std::move(pts)};
}

ProbVector ProbVector::checked(Eigen::VectorXd w) {
  if (w.size() < 1) throw input_error("probability vector must be nonempty");
  if ((w.array() < 0.0).any()) throw input_error("probability weights must be nonnegative");
  if (std::abs(w.sum() - 1.0) > 1e-12) throw input_error("probability weights must sum to 1 within 1e-12");
  return ProbVector{std::move(w)};
}

DirectionVector DirectionVector::checked(Eigen::VectorXd h) {
  if (h.size() < 1) throw input_error("direction vector must be nonempty");
  if (std::abs(h.sum()) > 1e-12) throw input_error("direction entries must sum to 0 within 1e-12");
  return DirectionVector{std::move(h)};
}

CovarianceMatrix CovarianceMatrix::checked(Eigen::MatrixXd m) {
  if (m.rows() != m.cols() || m.rows() < 1) throw input_error("covariance matrix must be square and nonempty");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw input_error("covariance matrix must be symmetric");
  }
  if ((m.rowwise().sum()).cwiseAbs().maxCoeff() > 1e-10) {
    throw input_error("covariance rows must sum to 0 within 1e-10");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10) {
    throw input_error("covariance matrix must be positive semidefinite");
  }
  return CovarianceMatrix{std::move(m)};
}

ProbVector empirical_distribution(const std::vector<int>& samples, const GroundSpace& space) {
  if (samples.empty()) throw input_error("empirical distribution needs at least one sample");
  const int N = space.N();
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(N);
  for (int idx : samples) {
    if (idx < 1 || idx > N) throw input_error("sample index out of range [1, N]");
    counts[idx - 1] += 1.0;
  }
  return ProbVector{counts / static_cast<double>(samples.size())};
}

CovarianceMatrix multinomial_covariance(const ProbVector& r) {
  const Eigen::VectorXd& w = r.w;
  Eigen::MatrixXd sigma = -(w * w.transpose());
  sigma.diagonal() = w.array() * (1.0 - w.array());
  return CovarianceMatrix{std::move(sigma)};
}

GaussianSampler::GaussianSampler(const CovarianceMatrix& sigma) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma.m);
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  factor_ = es.eigenvectors() * lam.cwiseSqrt().asDiagonal();
}

Eigen::VectorXd GaussianSampler::draw(Rng& rng) const {
  Eigen::VectorXd z(factor_.cols());
  rng.fill_normal(z);
  return factor_ * z;
}

std::vector<Eigen::VectorXd> sample_limit_gaussian(const CovarianceMatrix& sigma, int count, Rng rng) {
  GaussianSampler sampler(sigma);
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) out.push_back(sampler.draw(rng));
  return out;
}

ProbVector dirichlet_flat(int N, Rng rng) {
  if (N < 1) throw input_error("dirichlet_flat needs N >= 1");
  Eigen::VectorXd e(N);
  for (int i = 0; i < N; ++i) e[i] = rng.next_exponential();
  return ProbVector{e / e.sum()};
}

}  // namespace projwass
