#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "canonmap/rigid_pose.hpp"
#include "canonmap/spectral.hpp"

namespace canonmap {

/// Pinhole intrinsics, pixels.
struct CameraIntrinsics {
  double fx = 600.0;
  double fy = 600.0;
  double cx = 320.0;
  double cy = 240.0;
  int width = 640;
  int height = 480;

  void validate() const;
};

/// Foreground pixels with predicted embeddings. Pixel coordinates are
/// continuous (subpixel); `depth` is either empty or one z-depth per pixel.
struct Observation {
  std::vector<Eigen::Vector2d> pixels;
  EmbeddingMatrix embeddings;  // n x d
  std::vector<double> depth;
  CameraIntrinsics intrinsics;
  std::optional<RigidPose> extrinsics;  // camera-to-world

  std::size_t pixel_count() const { return pixels.size(); }
  bool has_depth() const { return !depth.empty(); }
};

/// Pass expected_dims < 0 to skip the dimension check.
void validate_observation(const Observation& obs, int expected_dims = -1);

Eigen::Vector3d pixel_ray(const CameraIntrinsics& k, const Eigen::Vector2d& pixel);

}  // namespace canonmap
