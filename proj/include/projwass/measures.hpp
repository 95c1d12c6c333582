#pragma once

#include <vector>

#include <Eigen/Core>

#include "projwass/rng.hpp"

namespace projwass {

// Shared support {x_1, ..., x_N} in R^d; column i holds x_i.
struct GroundSpace {
  Eigen::MatrixXd points;

  int N() const { return static_cast<int>(points.cols()); }
  int d() const { return static_cast<int>(points.rows()); }

  // validates N >= 1, d >= 1, points pairwise distinct (exact comparison)
  static GroundSpace checked(Eigen::MatrixXd pts);
};

// Weights on the simplex: nonnegative, summing to 1 within 1e-12. Zeros are
// permitted (empirical measures at small n routinely miss atoms).
struct ProbVector {
  Eigen::VectorXd w;

  int size() const { return static_cast<int>(w.size()); }
  static ProbVector checked(Eigen::VectorXd w);
};

// Tangent direction to the simplex: entries summing to 0 within 1e-12.
struct DirectionVector {
  Eigen::VectorXd h;

  int size() const { return static_cast<int>(h.size()); }
  static DirectionVector checked(Eigen::VectorXd h);
};

// Symmetric PSD matrix with rows summing to 0 (1 is always in the null space).
struct CovarianceMatrix {
  Eigen::MatrixXd m;

  int size() const { return static_cast<int>(m.rows()); }
  static CovarianceMatrix checked(Eigen::MatrixXd m);
};

// samples hold 1-based support indices
ProbVector empirical_distribution(const std::vector<int>& samples, const GroundSpace& space);

// diag r_i(1-r_i), off-diagonal -r_i r_j
CovarianceMatrix multinomial_covariance(const ProbVector& r);

// Draws from N(0, Sigma). The square root is the symmetric-eigendecomposition
// factor with negative eigenvalues clamped to 0 (Sigma is singular by
// construction, so Cholesky is unavailable). Factored once, reusable.
class GaussianSampler {
 public:
  explicit GaussianSampler(const CovarianceMatrix& sigma);

  Eigen::VectorXd draw(Rng& rng) const;
  int dim() const { return static_cast<int>(factor_.rows()); }

 private:
  Eigen::MatrixXd factor_;
};

std::vector<Eigen::VectorXd> sample_limit_gaussian(const CovarianceMatrix& sigma, int count, Rng rng);

// uniform draw on the simplex via normalized unit-rate exponentials
ProbVector dirichlet_flat(int N, Rng rng);

}  // namespace projwass
