#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "canonmap/rigid_pose.hpp"

namespace canonmap {

struct RigidFit {
  RigidPose transform;  // target ~= scale * R * source + t
  double scale = 1.0;
  double rms = 0.0;     // meters
};

/// Closed-form least-squares alignment of `source` onto `target`: centroid
/// alignment plus SVD of the cross-covariance with a determinant correction
/// (det R = +1). With `with_scale` the similarity (Umeyama) scale is also fit;
/// the returned RigidPose then carries only R and t.
/// Throws DimensionMismatch, InsufficientPixels (< 3 pairs) or
/// DegenerateConfiguration (collinear or coincident points).
RigidFit fit_rigid_transform(std::span<const Eigen::Vector3d> source, std::span<const Eigen::Vector3d> target,
                             bool with_scale = false);

double alignment_rms(const RigidPose& transform, double scale, std::span<const Eigen::Vector3d> source,
                     std::span<const Eigen::Vector3d> target);

struct RobustFitOptions {
  int iterations = 256;
  double inlier_threshold_m = 0.01;
  std::uint64_t seed = 7;
};

struct RobustFit {
  RigidFit fit;
  std::vector<int> inliers;  // ascending indices into the input pairs; fit.rms is over these
};

/// Seeded 3-point consensus followed by least-squares refits on the consensus
/// set. When every pair is an inlier the result equals fit_rigid_transform on
/// the full input.
RobustFit fit_rigid_transform_robust(std::span<const Eigen::Vector3d> source,
                                     std::span<const Eigen::Vector3d> target, const RobustFitOptions& options = {},
                                     bool with_scale = false);

}  // namespace canonmap
