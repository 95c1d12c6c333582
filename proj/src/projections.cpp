#include "projwass/projections.hpp"

#include <cmath>
#include <utility>

#include <Eigen/QR>

#include "projwass/errors.hpp"

namespace projwass {

namespace {

// thin QR with positive R diagonal; throws retraction_error when a diagonal
// entry of R vanishes (rank-deficient input)
Eigen::MatrixXd thin_qr_positive(const Eigen::MatrixXd& Y, double rank_tol) {
  const int d = static_cast<int>(Y.rows());
  const int k = static_cast<int>(Y.cols());
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(d, k);
  const Eigen::MatrixXd R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const double scale = Y.cwiseAbs().maxCoeff();
  for (int l = 0; l < k; ++l) {
    const double rll = R(l, l);
    if (std::abs(rll) <= rank_tol * (scale + 1e-300)) {
      throw retraction_error("matrix is numerically rank deficient, cannot orthonormalize");
    }
    if (rll < 0.0) Q.col(l) = -Q.col(l);
  }
  return Q;
}

}  // namespace

StiefelFrame StiefelFrame::checked(Eigen::MatrixXd cols) {
  const int d = static_cast<int>(cols.rows());
  const int k = static_cast<int>(cols.cols());
  if (k < 1 || k > d) throw input_error("frame needs 1 <= k <= d");
  const Eigen::MatrixXd gram = cols.transpose() * cols;
  if ((gram - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-10) {
    throw input_error("frame columns must be orthonormal within 1e-10");
  }
  return StiefelFrame{std::move(cols)};
}

ProjectionSet ProjectionSet::checked(std::vector<StiefelFrame> frames, Eigen::VectorXd weights, std::string tag) {
  if (frames.empty()) throw input_error("projection set must contain at least one frame");
  if (weights.size() != static_cast<Eigen::Index>(frames.size())) {
    throw input_error("projection set needs one weight per frame");
  }
  if ((weights.array() <= 0.0).any()) throw input_error("projection weights must be positive");
  if (std::abs(weights.sum() - 1.0) > 1e-12) throw input_error("projection weights must sum to 1 within 1e-12");
  const int d = frames.front().d();
  const int k = frames.front().k();
  for (const auto& f : frames) {
    if (f.d() != d || f.k() != k) throw input_error("all frames must share the same shape");
  }
  return ProjectionSet{std::move(frames), std::move(weights), std::move(tag)};
}

ProjectionSet ProjectionSet::uniform_monte_carlo(int d, int k, int T, Rng rng, std::string tag) {
  if (T < 1) throw input_error("projection set needs T >= 1 frames");
  std::vector<StiefelFrame> frames;
  frames.reserve(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) frames.push_back(sample_uniform_frame(d, k, rng));
  Eigen::VectorXd w = Eigen::VectorXd::Constant(T, 1.0 / static_cast<double>(T));
  return ProjectionSet{std::move(frames), std::move(w), std::move(tag)};
}

StiefelFrame sample_uniform_frame(int d, int k, Rng& rng) {
  if (k < 1 || k > d) throw input_error("frame sampling needs 1 <= k <= d");
  for (;;) {
    Eigen::MatrixXd G(d, k);
    for (int j = 0; j < k; ++j) {
      for (int i = 0; i < d; ++i) G(i, j) = rng.next_normal();
    }
    try {
      return StiefelFrame{thin_qr_positive(G, 1e-13)};
    } catch (const retraction_error&) {
      // measure-zero degenerate Gaussian draw; redraw
    }
  }
}

ProjectedSpace project_support(const GroundSpace& space, const StiefelFrame& E, double merge_tol) {
  if (E.d() != space.d()) throw input_error("frame dimension must match the space");
  const int N = space.N();
  const Eigen::MatrixXd proj = E.columns.transpose() * space.points;  // k x N

  ProjectedSpace out;
  out.merge_map.resize(N);
  Eigen::MatrixXd merged(E.k(), N);
  int count = 0;
  for (int i = 0; i < N; ++i) {
    int hit = -1;
    for (int c = 0; c < count; ++c) {
      if ((proj.col(i) - merged.col(c)).norm() <= merge_tol) {
        hit = c;
        break;
      }
    }
    if (hit < 0) {
      merged.col(count) = proj.col(i);
      hit = count++;
    }
    out.merge_map[i] = hit;
  }
  out.points = merged.leftCols(count);
  return out;
}

StiefelFrame qr_retract(const StiefelFrame& E, const Eigen::MatrixXd& tangent, double step) {
  if (tangent.rows() != E.d() || tangent.cols() != E.k()) throw input_error("tangent shape must match the frame");
  if (step == 0.0) return E;
  return StiefelFrame{thin_qr_positive(E.columns + step * tangent, 1e-12)};
}

}  // namespace projwass
