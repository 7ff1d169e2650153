#include <gtest/gtest.h>

#include <random>

#include "canonmap/error.hpp"
#include "canonmap/grasp.hpp"
#include "canonmap/pose_solver.hpp"
#include "canonmap/synth.hpp"
#include "support.hpp"

using namespace canonmap;
using namespace testing_support;

namespace {

RigidPose with_x_axis(const Eigen::Vector3d& x, const Eigen::Vector3d& p = Eigen::Vector3d::Zero()) {
  // Any right-handed frame whose first column is x.
  const Eigen::Vector3d xn = x.normalized();
  const Eigen::Vector3d helper = std::abs(xn.y()) < 0.9 ? Eigen::Vector3d::UnitY() : Eigen::Vector3d::UnitX();
  const Eigen::Vector3d z = xn.cross(helper).normalized();
  Eigen::Matrix3d r;
  r << xn, z.cross(xn), z;
  return RigidPose(r, p);
}

void expect_valid_grasp(const GraspPose& g) {
  const Eigen::Matrix3d r = g.pose.rotation();
  EXPECT_LT((r.transpose() * r - Eigen::Matrix3d::Identity()).norm(), 1e-12);
  EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
  EXPECT_EQ(r.col(2), Eigen::Vector3d::UnitZ());
  EXPECT_EQ(r.col(0).z(), 0.0);
  EXPECT_LT((r.col(0).cross(r.col(1)) - Eigen::Vector3d::UnitZ()).norm(), 1e-12);
}

std::vector<NamedPose> at_heights(std::initializer_list<std::pair<const char*, double>> hs) {
  std::vector<NamedPose> out;
  for (const auto& [name, z] : hs) out.push_back({name, RigidPose::translation_only({0.1, 0.2, z})});
  return out;
}

}  // namespace

TEST(GraspFrame, HorizontalAxisIsKept) {
  const auto g = grasp_frame(RigidPose::translation_only({1, 2, 3}));
  EXPECT_EQ(g.pose.rotation(), Eigen::Matrix3d::Identity());
  EXPECT_EQ(g.pose.translation(), Eigen::Vector3d(1, 2, 3));
  EXPECT_EQ(g.strategy, GraspStrategy::Part);
}

TEST(GraspFrame, TiltedAxisIsProjected) {
  const auto g = grasp_frame(with_x_axis(Eigen::Vector3d(1, 0, 1) / std::sqrt(2.0)));
  EXPECT_LT((g.pose.rotation().col(0) - Eigen::Vector3d(1, 0, 0)).norm(), 1e-15);
  expect_valid_grasp(g);
}

TEST(GraspFrame, VerticalAxisUsesYAxis) {
  Eigen::Matrix3d r;
  r << 0, 1, 0,  //
      0, 0, 1,   //
      1, 0, 0;   // x along z_w, y along world x
  const auto g = grasp_frame(RigidPose(r, Eigen::Vector3d::Zero()));
  EXPECT_EQ(g.pose.rotation().col(0), Eigen::Vector3d(1, 0, 0));
  expect_valid_grasp(g);
}

TEST(GraspFrame, BothAxesVerticalIsDegenerate) {
  // Not a rotation, but the frame builder only looks at the first two columns.
  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
  r.col(0) = Eigen::Vector3d(0, 0, 1);
  r.col(1) = Eigen::Vector3d(0, 1e-4, -1);
  try {
    grasp_frame(RigidPose(r, Eigen::Vector3d::Zero()));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateOrientation);
  }
}

TEST(GraspFrame, RandomPosesProperties) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 1000; ++i) {
    const RigidPose pose(random_rotation(rng), {u(rng), u(rng), u(rng)});
    GraspPose g;
    try {
      g = grasp_frame(pose);
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), ErrorCode::DegenerateOrientation);
      continue;
    }
    expect_valid_grasp(g);
    EXPECT_EQ(g.pose.translation(), pose.translation());
    // Only the heading of the horizontal projection of x matters.
    const double yaw = u(rng) * 3;
    const Eigen::Matrix3d rz = axis_angle_rotation(Eigen::Vector3d::UnitZ(), yaw);
    const auto rotated = grasp_frame(RigidPose(rz * pose.rotation(), pose.translation()));
    EXPECT_LT((rotated.pose.rotation() - rz * g.pose.rotation()).norm(), 1e-9);
  }
}

TEST(GraspFrame, DependsOnlyOnHorizontalDirection) {
  const auto a = grasp_frame(with_x_axis({0.3, 0.4, 0.2}));
  const auto b = grasp_frame(with_x_axis({0.6, 0.8, -0.9}));
  EXPECT_LT((a.pose.rotation() - b.pose.rotation()).norm(), 1e-12);
}

TEST(MidGrab, SquareCenterAndCoincident) {
  const std::vector<NamedPose> square{{"belly", RigidPose::translation_only({0, 0, 0.2})},
                                      {"back", RigidPose::translation_only({1, 0, 0.2})},
                                      {"left hand", RigidPose::translation_only({1, 1, 0.2})},
                                      {"right hand", RigidPose::translation_only({0, 1, 0.2})}};
  const auto names = default_mid_grab_parts();
  const auto g = mid_grab_target(RigidPose(), square, names);
  EXPECT_LT((g.pose.translation() - Eigen::Vector3d(0.5, 0.5, 0.2)).norm(), 1e-15);
  EXPECT_EQ(g.strategy, GraspStrategy::Mid);
  std::vector<NamedPose> same;
  for (const auto& n : names) same.push_back({n, RigidPose::translation_only({0.3, -0.2, 0.1})});
  EXPECT_EQ(mid_grab_target(RigidPose(), same, names).pose.translation(), Eigen::Vector3d(0.3, -0.2, 0.1));
  same.pop_back();
  try {
    mid_grab_target(RigidPose(), same, names);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingPart);
  }
}

TEST(MidGrab, NoiselessTurtleMatchesTruth) {
  const auto& f = turtle();
  auto cfg = default_scenario();
  cfg.pixel_budget = 3000;
  const auto synth = generate_observation(f.mesh, f.table(), f.parts, cfg);
  PoseConfig pc;
  pc.match.k = 1;
  const auto result = solve_poses(synth.observation, f.mesh, f.table(), f.parts, pc, f.nn());
  const RigidPose& world = *cfg.extrinsics;
  std::vector<NamedPose> estimated;
  for (const auto& p : result.parts) estimated.push_back({p.name, world * p.pose});
  const auto names = default_mid_grab_parts();
  const auto g = mid_grab_target(world * result.object_pose, estimated, names);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : synth.true_part_poses)
    if (std::find(names.begin(), names.end(), p.name) != names.end()) mean += (world * p.pose).translation();
  mean /= static_cast<double>(names.size());
  EXPECT_LT((g.pose.translation() - mean).norm(), 1e-6);
}

TEST(HighestPart, SelectionAndTies) {
  EXPECT_EQ(highest_part_target(at_heights({{"a", 0.1}, {"b", 0.3}, {"c", 0.2}})).part, "b");
  EXPECT_EQ(highest_part_target(at_heights({{"zeta", 0.3}, {"alpha", 0.3}, {"c", 0.2}})).part, "alpha");
  const auto g = highest_part_target(at_heights({{"only", -1.0}}));
  EXPECT_EQ(g.strategy, GraspStrategy::Highest);
  EXPECT_EQ(g.pose.translation().z(), -1.0);
  try {
    highest_part_target(std::vector<NamedPose>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingPart);
  }
}

TEST(HighestPart, InvariantUnderHeightPreservingMotion) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<NamedPose> parts;
    for (int i = 0; i < 6; ++i)
      parts.push_back({std::string(1, static_cast<char>('a' + i)), RigidPose::translation_only({u(rng), u(rng), u(rng)})});
    const auto before = highest_part_target(parts).part;
    const RigidPose motion(axis_angle_rotation(Eigen::Vector3d::UnitZ(), u(rng) * 3), {u(rng), u(rng), u(rng)});
    for (auto& p : parts) p.pose = motion * p.pose;
    EXPECT_EQ(highest_part_target(parts).part, before);
  }
}

TEST(HighestPart, FoldRaisesLeftHand) {
  const auto& f = turtle();
  const Eigen::Vector3d c = f.part("left hand").centroid;
  const Eigen::Vector3d out = Eigen::Vector3d(c.x(), c.y(), 0).normalized();
  auto cfg = default_scenario();
  cfg.pixel_budget = 100000;
  // 90 degrees about a horizontal axis through a hinge halfway to the shell center.
  cfg.articulations.push_back(
      {"left hand", out.cross(Eigen::Vector3d::UnitZ()), 3.14159265358979323846 / 2, Eigen::Vector3d(c.x() / 2, c.y() / 2, c.z())});
  const auto synth = generate_observation(f.mesh, f.table(), f.parts, cfg);
  const RigidPose& world = *cfg.extrinsics;
  std::vector<NamedPose> truth;
  for (const auto& p : synth.true_part_poses) truth.push_back({p.name, world * p.pose});
  EXPECT_EQ(highest_part_target(truth).part, "left hand");

  PoseConfig pc;
  pc.match.k = 1;
  const auto result = solve_poses(synth.observation, f.mesh, f.table(), f.parts, pc, f.nn());
  std::vector<NamedPose> estimated;
  for (const auto& p : result.parts) estimated.push_back({p.name, world * p.pose});
  EXPECT_EQ(highest_part_target(estimated).part, "left hand");
}

TEST(GraspStrategy, Strings) {
  EXPECT_EQ(to_string(GraspStrategy::Mid), "mid");
  EXPECT_EQ(to_string(GraspStrategy::Highest), "highest");
}
