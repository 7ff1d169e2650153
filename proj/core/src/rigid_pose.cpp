#include "canonmap/rigid_pose.hpp"

#include <cmath>
#include <string>

#include "canonmap/error.hpp"

namespace canonmap {

RigidPose RigidPose::from_matrix(const Eigen::Matrix4d& m, double tolerance) {
  if (!m.allFinite()) throw Error(ErrorCode::ValidationError, "pose matrix has non-finite entries");
  const Eigen::Matrix3d r = m.topLeftCorner<3, 3>();
  const double ortho = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho > tolerance)
    throw Error(ErrorCode::ValidationError,
                "pose rotation is not orthonormal (deviation " + std::to_string(ortho) + ")");
  if (std::abs(r.determinant() - 1.0) > tolerance)
    throw Error(ErrorCode::ValidationError, "pose rotation determinant is not +1");
  const Eigen::RowVector4d bottom = m.row(3);
  if ((bottom - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > tolerance)
    throw Error(ErrorCode::ValidationError, "pose bottom row must be (0, 0, 0, 1)");
  return {r, m.topRightCorner<3, 1>()};
}

Eigen::Matrix4d RigidPose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

RigidPose RigidPose::inverse() const {
  const Eigen::Matrix3d rt = rotation_.transpose();
  return {rt, -(rt * translation_)};
}

double rotation_angle(const Eigen::Matrix3d& r1, const Eigen::Matrix3d& r2) {
  const Eigen::Matrix3d rel = r1.transpose() * r2;
  const double cos_part = (rel.trace() - 1.0) / 2.0;
  const Eigen::Vector3d skew(rel(2, 1) - rel(1, 2), rel(0, 2) - rel(2, 0), rel(1, 0) - rel(0, 1));
  const double sin_part = skew.norm() / 2.0;
  return std::atan2(sin_part, cos_part);
}

PoseError pose_error(const RigidPose& estimate, const RigidPose& truth) {
  return {rotation_angle(estimate.rotation(), truth.rotation()),
          (estimate.translation() - truth.translation()).norm()};
}

Eigen::Matrix3d axis_angle_rotation(const Eigen::Vector3d& axis, double angle_rad) {
  return Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix();
}

}  // namespace canonmap
