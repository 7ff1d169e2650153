#include "canonmap/grasp.hpp"

#include <algorithm>

#include "canonmap/error.hpp"

namespace canonmap {

std::string_view to_string(GraspStrategy s) {
  switch (s) {
    case GraspStrategy::Part: return "part";
    case GraspStrategy::Mid: return "mid";
    case GraspStrategy::Highest: return "highest";
  }
  return "part";
}

GraspPose grasp_frame(const RigidPose& part_pose_world, const Eigen::Vector3d& up) {
  const Eigen::Vector3d z_w = up.normalized();
  auto horizontal = [&](const Eigen::Vector3d& axis) -> Eigen::Vector3d { return axis - axis.dot(z_w) * z_w; };
  Eigen::Vector3d x_g = horizontal(part_pose_world.rotation().col(0));
  if (x_g.norm() < kHorizontalTolerance) {
    x_g = horizontal(part_pose_world.rotation().col(1));
    if (x_g.norm() < kHorizontalTolerance)
      throw Error(ErrorCode::DegenerateOrientation, "part x- and y-axes are both vertical");
  }
  x_g.normalize();
  Eigen::Matrix3d r;
  r.col(0) = x_g;
  r.col(1) = z_w.cross(x_g);
  r.col(2) = z_w;
  return {RigidPose(r, part_pose_world.translation()), {}, GraspStrategy::Part};
}

std::vector<std::string> default_mid_grab_parts() { return {"belly", "back", "left hand", "right hand"}; }

GraspPose mid_grab_target(const RigidPose& object_pose_world, std::span<const NamedPose> part_poses_world,
                          std::span<const std::string> names, const Eigen::Vector3d& up) {
  if (names.empty()) throw Error(ErrorCode::MissingPart, "mid grab needs at least one part name");
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const auto& name : names) {
    const auto it = std::find_if(part_poses_world.begin(), part_poses_world.end(),
                                 [&](const NamedPose& p) { return p.name == name; });
    if (it == part_poses_world.end()) throw Error(ErrorCode::MissingPart, "mid grab needs part '" + name + "'");
    sum += it->pose.translation();
  }
  GraspPose g = grasp_frame(object_pose_world, up);
  g.pose = RigidPose(g.pose.rotation(), sum / static_cast<double>(names.size()));
  g.part = "mid";
  g.strategy = GraspStrategy::Mid;
  return g;
}

GraspPose highest_part_target(std::span<const NamedPose> part_poses_world, const Eigen::Vector3d& up) {
  if (part_poses_world.empty()) throw Error(ErrorCode::MissingPart, "highest-part grab needs at least one part");
  const Eigen::Vector3d z_w = up.normalized();
  const NamedPose* best = &part_poses_world.front();
  for (const auto& p : part_poses_world.subspan(1)) {
    const double h = p.pose.translation().dot(z_w);
    const double hb = best->pose.translation().dot(z_w);
    if (h > hb || (h == hb && p.name < best->name)) best = &p;
  }
  GraspPose g = grasp_frame(best->pose, up);
  g.part = best->name;
  g.strategy = GraspStrategy::Highest;
  return g;
}

}  // namespace canonmap
