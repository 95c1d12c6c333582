#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "projwass/measures.hpp"
#include "projwass/rng.hpp"

namespace projwass {

// Orthonormal d x k frame.
struct StiefelFrame {
  Eigen::MatrixXd columns;

  int d() const { return static_cast<int>(columns.rows()); }
  int k() const { return static_cast<int>(columns.cols()); }

  // validates ||E'E - I||_max <= 1e-10
  static StiefelFrame checked(Eigen::MatrixXd cols);
};

// Weighted frame collection discretizing a measure on the Stiefel manifold.
struct ProjectionSet {
  std::vector<StiefelFrame> frames;
  Eigen::VectorXd weights;  // positive, sum 1 within 1e-12
  std::string measure_tag;

  int size() const { return static_cast<int>(frames.size()); }

  static ProjectionSet checked(std::vector<StiefelFrame> frames, Eigen::VectorXd weights, std::string tag);
  // T equally weighted Haar draws
  static ProjectionSet uniform_monte_carlo(int d, int k, int T, Rng rng, std::string tag = "uniform-mc");
};

// Projected support with collision bookkeeping: merged points are pairwise
// distinct beyond merge_tol, in order of first appearance; merge_map sends
// each original index to its merged index.
struct ProjectedSpace {
  Eigen::MatrixXd points;  // k x N'
  std::vector<int> merge_map;

  int merged_count() const { return static_cast<int>(points.cols()); }
};

// Haar draw: thin QR of a d x k standard Gaussian matrix, with the sign
// convention that makes the R diagonal positive (the unique convention that
// keeps the factor exactly Haar distributed).
StiefelFrame sample_uniform_frame(int d, int k, Rng& rng);

ProjectedSpace project_support(const GroundSpace& space, const StiefelFrame& E, double merge_tol = 1e-12);

// Thin orthonormalization of E + step*tangent; step = 0 returns E exactly.
// Throws retraction_error (see errors.hpp via measures) on rank deficiency.
StiefelFrame qr_retract(const StiefelFrame& E, const Eigen::MatrixXd& tangent, double step);

// Recoverable failure of qr_retract: the stepped matrix lost column rank and
// the caller should shrink the step.
class retraction_error : public std::runtime_error {
 public:
  explicit retraction_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace projwass
