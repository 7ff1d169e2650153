#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace canonmap {

/// Rigid transform in SE(3), stored as rotation + translation.
///
/// Composition follows matrix convention: (a * b) applies b first.
class RigidPose {
 public:
  RigidPose() : rotation_(Eigen::Matrix3d::Identity()), translation_(Eigen::Vector3d::Zero()) {}
  RigidPose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
      : rotation_(rotation), translation_(translation) {}

  /// Builds a pose from a homogeneous matrix, checking orthonormality,
  /// det = +1 and the bottom row against `tolerance`. Throws ValidationError.
  static RigidPose from_matrix(const Eigen::Matrix4d& m, double tolerance = 1e-9);

  static RigidPose identity() { return {}; }
  static RigidPose translation_only(const Eigen::Vector3d& t) {
    return {Eigen::Matrix3d::Identity(), t};
  }

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  Eigen::Matrix4d matrix() const;
  RigidPose inverse() const;

  RigidPose operator*(const RigidPose& rhs) const {
    return {rotation_ * rhs.rotation_, rotation_ * rhs.translation_ + translation_};
  }
  Eigen::Vector3d operator*(const Eigen::Vector3d& p) const { return rotation_ * p + translation_; }

  bool operator==(const RigidPose& rhs) const {
    return rotation_ == rhs.rotation_ && translation_ == rhs.translation_;
  }

 private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

/// Geodesic angle between two rotations, arccos((tr(R1^T R2) - 1) / 2),
/// evaluated through atan2 so that tiny angles keep full precision.
double rotation_angle(const Eigen::Matrix3d& r1, const Eigen::Matrix3d& r2);

/// Rotation error and translation error (meters) between two poses.
struct PoseError {
  double rotation_rad = 0.0;
  double translation_m = 0.0;
};
PoseError pose_error(const RigidPose& estimate, const RigidPose& truth);

Eigen::Matrix3d axis_angle_rotation(const Eigen::Vector3d& axis, double angle_rad);

}  // namespace canonmap
