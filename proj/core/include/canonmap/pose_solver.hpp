#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "canonmap/correspondence.hpp"
#include "canonmap/depth_free.hpp"
#include "canonmap/mesh.hpp"
#include "canonmap/observation.hpp"
#include "canonmap/parts.hpp"
#include "canonmap/rigid_fit.hpp"
#include "canonmap/rigid_pose.hpp"

namespace canonmap {

/// Back-projects the listed pixels with their sensor depth:
/// x = ((u - cx) z / fx, (v - cy) z / fy, z). Throws MissingDepth or NonPositiveDepth.
std::vector<Eigen::Vector3d> unproject_pixels(const Observation& obs, std::span<const int> pixels);

enum class DepthMode { Sensor, Pairwise };
std::string_view to_string(DepthMode mode);
DepthMode depth_mode_from_string(std::string_view s);

struct PoseConfig {
  MatchConfig match;
  DepthMode depth_mode = DepthMode::Sensor;
  DepthSolverOptions depth;
  int min_part_pixels = 10;
  bool with_scale = false;
  bool robust = false;  // consensus over correspondences before the final least-squares fit
  RobustFitOptions robust_options;
};

enum class PartPoseMode { Fitted, RigidFallback };
std::string_view to_string(PartPoseMode mode);

struct PartPose {
  std::string name;
  RigidPose pose;  // part frame in the camera frame
  PartPoseMode mode = PartPoseMode::RigidFallback;
  int pixels = 0;  // surviving correspondences restricted to the part
  double residual_rms = 0.0;
};

/// `solver_transform` maps camera points onto canonical vertices (what the
/// least-squares step solves for); `object_pose` is its inverse, the object
/// frame expressed in the camera frame.
struct PoseResult {
  RigidPose object_pose;
  RigidPose solver_transform;
  double scale = 1.0;
  std::vector<PartPose> parts;
  double residual_rms = 0.0;
  int inlier_count = 0;
  int kept_pixels = 0;
  std::vector<double> estimated_depths;  // pairwise mode only, aligned with kept pixels
};

/// Canonical mapping to 6D poses: top-K candidates, threshold/median masks,
/// per-pixel target means, unprojection (sensor or pairwise depths) and a
/// rigid fit; then the same for every part with candidates restricted to its
/// members. Parts with fewer than min_part_pixels correspondences, or a
/// degenerate fit, take the rigid fallback object_pose * part_frame.
/// `nn_median` resolves unset thresholds (see MatchConfig).
PoseResult solve_poses(const Observation& obs, const CanonicalMesh& mesh, const VertexEmbeddingTable& table,
                       std::span<const PartDefinition> parts, const PoseConfig& config, double nn_median);

}  // namespace canonmap
