#include "canonmap/frame.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "canonmap/error.hpp"
#include "canonmap/parallel.hpp"

namespace canonmap {

RigidPose assign_canonical_frame(const CanonicalMesh& mesh) {
  const std::size_t m = mesh.vertex_count();
  if (m < 3) throw Error(ErrorCode::DegenerateGeometry, "canonical frame needs at least 3 vertices");
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& v : mesh.vertices) centroid += v;
  centroid /= static_cast<double>(m);

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& v : mesh.vertices) {
    const Eigen::Vector3d d = v - centroid;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(m);

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  const Eigen::Vector3d values = eig.eigenvalues();  // ascending
  if (!(values(2) > 0.0) || values(0) <= 1e-12 * values(2))
    throw Error(ErrorCode::DegenerateGeometry, "vertex covariance has rank < 3");

  Eigen::Matrix3d axes;
  for (int k = 0; k < 3; ++k) axes.col(k) = eig.eigenvectors().col(2 - k);

  for (int k = 0; k < 3; ++k) {
    double skew = 0.0;
    double scale = 0.0;
    for (const auto& v : mesh.vertices) {
      const double p = (v - centroid).dot(axes.col(k));
      skew += p * p * p;
      scale += std::abs(p * p * p);
    }
    bool flip = false;
    if (std::abs(skew) > 1e-9 * scale) {
      flip = skew < 0.0;
    } else {
      Eigen::Index largest = 0;
      axes.col(k).cwiseAbs().maxCoeff(&largest);
      flip = axes(largest, k) < 0.0;
    }
    if (flip) axes.col(k) = -axes.col(k);
  }
  if (axes.determinant() < 0.0) axes.col(2) = -axes.col(2);

  const Eigen::Matrix3d rotation = axes.transpose();
  return {rotation, -(rotation * centroid)};
}

double SymmetryMap::max_residual() const {
  return residual.empty() ? 0.0 : *std::max_element(residual.begin(), residual.end());
}

double SymmetryMap::mean_residual() const {
  if (residual.empty()) return 0.0;
  return std::accumulate(residual.begin(), residual.end(), 0.0) / static_cast<double>(residual.size());
}

SymmetryMap compute_symmetry_map(const CanonicalMesh& mesh, const RigidPose& frame, int axis) {
  if (axis < 0 || axis > 2)
    throw Error(ErrorCode::ValidationError, "symmetry axis must be 0, 1 or 2 (got " + std::to_string(axis) + ")");
  const std::size_t m = mesh.vertex_count();
  std::vector<Eigen::Vector3d> canonical(m);
  for (std::size_t i = 0; i < m; ++i) canonical[i] = frame * mesh.vertices[i];

  SymmetryMap map;
  map.axis = axis;
  map.partner.assign(m, 0);
  map.residual.assign(m, 0.0);
  parallel_for(m, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Eigen::Vector3d mirrored = canonical[i];
      mirrored[axis] = -mirrored[axis];
      double best = std::numeric_limits<double>::infinity();
      int best_j = 0;
      for (std::size_t j = 0; j < m; ++j) {
        const double d2 = (canonical[j] - mirrored).squaredNorm();
        if (d2 < best) {
          best = d2;
          best_j = static_cast<int>(j);
        }
      }
      map.partner[i] = best_j;
      map.residual[i] = std::sqrt(best);
    }
  });
  return map;
}

SymmetryMap compute_best_symmetry_map(const CanonicalMesh& mesh, const RigidPose& frame) {
  SymmetryMap best = compute_symmetry_map(mesh, frame, 0);
  for (int axis = 1; axis < 3; ++axis) {
    SymmetryMap cand = compute_symmetry_map(mesh, frame, axis);
    if (cand.mean_residual() < best.mean_residual()) best = std::move(cand);
  }
  return best;
}

}  // namespace canonmap
