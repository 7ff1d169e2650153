#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "canonmap/rigid_pose.hpp"
#include "canonmap/synth.hpp"

namespace canonmap {

enum class GraspStrategy { Part, Mid, Highest };
std::string_view to_string(GraspStrategy s);

struct GraspPose {
  RigidPose pose;  // world frame
  std::string part;
  GraspStrategy strategy = GraspStrategy::Part;
};

inline constexpr double kHorizontalTolerance = 1e-3;

/// Gripper frame from a world-frame part pose:
///   x_g = normalize(x_o - (x_o . z_w) z_w),  B_g = [x_g, z_w x x_g, z_w, p].
/// If the part x-axis is within tolerance of vertical, its y-axis is used as
/// x_o; if that is vertical too, throws DegenerateOrientation.
GraspPose grasp_frame(const RigidPose& part_pose_world, const Eigen::Vector3d& up = Eigen::Vector3d::UnitZ());

std::vector<std::string> default_mid_grab_parts();  // belly, back, left hand, right hand

/// Position: mean of the named part origins; orientation: grasp_frame of the
/// object pose. Throws MissingPart.
GraspPose mid_grab_target(const RigidPose& object_pose_world, std::span<const NamedPose> part_poses_world,
                          std::span<const std::string> names, const Eigen::Vector3d& up = Eigen::Vector3d::UnitZ());

/// Grasp on the part whose origin is highest along `up`; ties go to the
/// lexicographically smaller name. Throws MissingPart on empty input.
GraspPose highest_part_target(std::span<const NamedPose> part_poses_world,
                              const Eigen::Vector3d& up = Eigen::Vector3d::UnitZ());

}  // namespace canonmap
