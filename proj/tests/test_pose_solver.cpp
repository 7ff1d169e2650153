#include <gtest/gtest.h>

#include <numeric>

#include "canonmap/depth_free.hpp"
#include "canonmap/error.hpp"
#include "canonmap/eval.hpp"
#include "canonmap/pose_solver.hpp"
#include "canonmap/synth.hpp"
#include "support.hpp"

using namespace canonmap;
using namespace testing_support;

namespace {

constexpr double kDeg = 3.14159265358979323846 / 180.0;

PoseConfig exact_config() {
  PoseConfig cfg;
  cfg.match.k = 1;  // noiseless data: the single nearest vertex is the true one
  return cfg;
}

ScenarioConfig tilted_scenario(std::uint64_t seed) {
  auto cfg = default_scenario();
  cfg.rng_seed = seed;
  const RigidPose world(axis_angle_rotation({0.3, 1.0, 0.0}, 0.2) * axis_angle_rotation({0, 0, 1}, 0.7),
                        {0.02, -0.01, 0.0});
  cfg.object_pose = cfg.extrinsics->inverse() * world;
  return cfg;
}

const RigidPose& truth_of(const SyntheticObservation& s, const std::string& name) {
  for (const auto& p : s.true_part_poses)
    if (p.name == name) return p.pose;
  throw std::out_of_range(name);
}

}  // namespace

TEST(Unproject, PrincipalPointAndUnitTangent) {
  Observation obs;
  obs.pixels = {{320, 240}, {320 + 600, 240}};
  obs.depth = {0.8, 1.0};
  obs.embeddings = EmbeddingMatrix::Zero(2, 2);
  const std::vector<int> idx{0, 1};
  const auto pts = unproject_pixels(obs, idx);
  EXPECT_EQ(pts[0], Eigen::Vector3d(0, 0, 0.8));
  EXPECT_EQ(pts[1].x(), 1.0);
  EXPECT_EQ(pts[1].z(), 1.0);
}

TEST(Unproject, DepthErrors) {
  Observation obs;
  obs.pixels = {{320, 240}};
  obs.embeddings = EmbeddingMatrix::Zero(1, 2);
  const std::vector<int> idx{0};
  try {
    unproject_pixels(obs, idx);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingDepth);
  }
  obs.depth = {0.0};
  try {
    unproject_pixels(obs, idx);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveDepth);
  }
}

TEST(SolvePoses, NoiselessObjectAndParts) {
  const auto& f = turtle();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto synth = generate_observation(f.mesh, f.table(), f.parts, tilted_scenario(seed));
    const auto result = solve_poses(synth.observation, f.mesh, f.table(), f.parts, exact_config(), f.nn());
    const auto err = pose_error(result.object_pose, synth.true_object_pose);
    EXPECT_LT(err.rotation_rad, 1e-6);
    EXPECT_LT(err.translation_m, 1e-6);
    EXPECT_LT(((result.solver_transform * result.object_pose).matrix() - Eigen::Matrix4d::Identity()).norm(), 1e-9);
    EXPECT_GE(result.residual_rms, 0.0);
    int fitted = 0;
    for (const auto& part : result.parts) {
      const RigidPose rigid = result.object_pose * part_frame(f.part(part.name));
      const auto pe = pose_error(part.pose, rigid);
      EXPECT_LT(pe.rotation_rad, 1e-6) << part.name;
      EXPECT_LT(pe.translation_m, 1e-6) << part.name;
      if (part.mode == PartPoseMode::Fitted) {
        ++fitted;
        EXPECT_GE(part.pixels, 10);
        EXPECT_LT(pose_error(part.pose, truth_of(synth, part.name)).rotation_rad, 1e-6);
      } else {
        EXPECT_LT(part.pixels, 10);
      }
    }
    EXPECT_GE(fitted, 1);
  }
}

TEST(SolvePoses, HiddenPartFallsBackExactly) {
  const auto& f = turtle();
  auto cfg = tilted_scenario(3);
  cfg.hidden_parts = {"right hand"};
  const auto synth = generate_observation(f.mesh, f.table(), f.parts, cfg);
  const auto result = solve_poses(synth.observation, f.mesh, f.table(), f.parts, exact_config(), f.nn());
  for (const auto& part : result.parts) {
    if (part.name != "right hand") continue;
    EXPECT_EQ(part.mode, PartPoseMode::RigidFallback);
    EXPECT_EQ(part.pixels, 0);
    EXPECT_EQ(part.pose, result.object_pose * part_frame(f.part("right hand")));
  }
}

TEST(SolvePoses, ArticulatedPartRecoversAngle) {
  const auto& f = turtle();
  auto cfg = default_scenario();
  cfg.pixel_budget = 100000;
  cfg.articulations.push_back({"left hand", Eigen::Vector3d::UnitZ(), 20.0 * kDeg, std::nullopt});
  const auto synth = generate_observation(f.mesh, f.table(), f.parts, cfg);
  const auto result = solve_poses(synth.observation, f.mesh, f.table(), f.parts, exact_config(), f.nn());
  EXPECT_LT(pose_error(result.object_pose, synth.true_object_pose).rotation_rad, 0.5 * kDeg);
  for (const auto& part : result.parts) {
    if (part.name != "left hand") continue;
    ASSERT_EQ(part.mode, PartPoseMode::Fitted);
    const double recovered = rotation_angle(part.pose.rotation(), result.object_pose.rotation());
    EXPECT_NEAR(recovered, 20.0 * kDeg, 1.0 * kDeg);
  }
}

TEST(SolvePoses, PairwiseDepthAgreesWithSensor) {
  const auto& f = turtle();
  const auto synth = generate_observation(f.mesh, f.table(), f.parts, tilted_scenario(4));
  auto cfg = exact_config();
  const auto sensor = solve_poses(synth.observation, f.mesh, f.table(), f.parts, cfg, f.nn());
  cfg.depth_mode = DepthMode::Pairwise;
  Observation no_depth = synth.observation;
  no_depth.depth.clear();
  const auto pairwise = solve_poses(no_depth, f.mesh, f.table(), f.parts, cfg, f.nn());
  const auto diff = pose_error(pairwise.object_pose, sensor.object_pose);
  EXPECT_LT(diff.rotation_rad, 0.1 * kDeg);
  EXPECT_LT(diff.translation_m, 1e-3);
  ASSERT_EQ(pairwise.estimated_depths.size(), synth.observation.pixel_count());
  for (std::size_t i = 0; i < pairwise.estimated_depths.size(); ++i)
    EXPECT_NEAR(pairwise.estimated_depths[i], synth.observation.depth[i], 0.01 * synth.observation.depth[i]);
}

TEST(SolvePoses, SensorModeNeedsDepth) {
  const auto& f = turtle();
  auto synth = generate_observation(f.mesh, f.table(), f.parts, default_scenario());
  synth.observation.depth.clear();
  try {
    solve_poses(synth.observation, f.mesh, f.table(), f.parts, exact_config(), f.nn());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingDepth);
  }
}

TEST(SolvePoses, EverythingMaskedIsEmptyCorrespondenceSet) {
  const auto& f = turtle();
  const auto synth = generate_observation(f.mesh, f.table(), f.parts, default_scenario());
  auto cfg = exact_config();
  cfg.match.k = 3;
  cfg.match.max_dist = 1e-300;  // nothing is closer than this except exact hits...
  cfg.match.outlier_max_dist = 1e-300;
  Observation shifted = synth.observation;
  shifted.embeddings.array() += 1.0;  // ...and there are none
  try {
    solve_poses(shifted, f.mesh, f.table(), f.parts, cfg, f.nn());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyCorrespondenceSet);
  }
}

TEST(SolvePoses, DeterministicWithNoise) {
  const auto& f = turtle();
  auto cfg = tilted_scenario(9);
  cfg.embedding_noise = 0.5 * f.nn();
  cfg.outlier_rate = 0.3;
  const auto synth = generate_observation(f.mesh, f.table(), f.parts, cfg);
  for (bool robust : {false, true}) {
    PoseConfig pc;
    pc.robust = robust;
    const auto a = solve_poses(synth.observation, f.mesh, f.table(), f.parts, pc, f.nn());
    const auto b = solve_poses(synth.observation, f.mesh, f.table(), f.parts, pc, f.nn());
    EXPECT_EQ(a.object_pose, b.object_pose);
    const auto err = pose_error(a.object_pose, synth.true_object_pose);
    EXPECT_LT(err.rotation_rad, 5 * kDeg);
    EXPECT_LT(err.translation_m, 0.01);
  }
}

TEST(DepthFree, NoiselessDepthsWithinOnePercent) {
  const auto& f = turtle();
  auto cfg = tilted_scenario(2);
  cfg.pixel_budget = 150;  // all-pairs regime
  const auto synth = generate_observation(f.mesh, f.table(), f.parts, cfg);
  const auto cand = topk_vertex_candidates(synth.observation, f.table(), 1);
  const auto corr = aggregate_targets(f.mesh, cand, filter_matches(cand, 1e9, 1e9));
  const auto est = estimate_depths_pairwise(synth.observation, corr);
  EXPECT_EQ(est.pair_count, 150u * 149u / 2u);
  for (std::size_t i = 0; i < corr.size(); ++i)
    EXPECT_NEAR(est.depths[i], synth.observation.depth[static_cast<std::size_t>(corr.kept_pixels[i])],
                0.01 * synth.observation.depth[static_cast<std::size_t>(corr.kept_pixels[i])]);
}

TEST(DepthFree, SampledPairsBeyondLimit) {
  const auto& f = turtle();
  const auto synth = generate_observation(f.mesh, f.table(), f.parts, tilted_scenario(5));
  const auto cand = topk_vertex_candidates(synth.observation, f.table(), 1);
  const auto corr = aggregate_targets(f.mesh, cand, filter_matches(cand, 1e9, 1e9));
  ASSERT_GT(corr.size(), 200u);
  const auto est = estimate_depths_pairwise(synth.observation, corr);
  EXPECT_EQ(est.pair_count, 20u * corr.size());
  const auto again = estimate_depths_pairwise(synth.observation, corr);
  EXPECT_EQ(est.depths, again.depths);
}

TEST(DepthFree, ScaleEquivariance) {
  const auto& f = turtle();
  auto cfg = tilted_scenario(6);
  cfg.pixel_budget = 120;
  const auto synth = generate_observation(f.mesh, f.table(), f.parts, cfg);
  const auto cand = topk_vertex_candidates(synth.observation, f.table(), 1);
  const auto corr = aggregate_targets(f.mesh, cand, filter_matches(cand, 1e9, 1e9));
  const auto base = estimate_depths_pairwise(synth.observation, corr);
  for (double s : {0.5, 2.0}) {
    FilteredCorrespondences scaled = corr;
    for (auto& t : scaled.targets) t *= s;
    const auto est = estimate_depths_pairwise(synth.observation, scaled);
    for (std::size_t i = 0; i < corr.size(); ++i) EXPECT_NEAR(est.depths[i], s * base.depths[i], 1e-6 * s);
  }
}

TEST(DepthFree, CoincidentRaysAndTooFewPixels) {
  Observation obs;
  obs.pixels.assign(6, Eigen::Vector2d(300, 200));
  obs.embeddings = EmbeddingMatrix::Zero(6, 2);
  FilteredCorrespondences corr;
  for (int i = 0; i < 6; ++i) {
    corr.kept_pixels.push_back(i);
    corr.targets.emplace_back(0.01 * i, 0.02 * (i % 2), 0.0);
    corr.source_vertices.push_back({i});
  }
  try {
    estimate_depths_pairwise(obs, corr);
    FAIL();
  } catch (const DepthSolveFailure& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConvergenceFailure);
    EXPECT_EQ(e.best().depths.size(), 6u);
  }
  corr.kept_pixels.resize(3);
  corr.targets.resize(3);
  try {
    estimate_depths_pairwise(obs, corr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientPixels);
  }
}

TEST(Modes, Strings) {
  EXPECT_EQ(to_string(PartPoseMode::Fitted), "fitted");
  EXPECT_EQ(to_string(PartPoseMode::RigidFallback), "rigid-fallback");
  EXPECT_EQ(depth_mode_from_string("pairwise"), DepthMode::Pairwise);
  EXPECT_THROW(depth_mode_from_string("lidar"), Error);
}

TEST(DepthFree, LinearStartEscapesConstantStartMinimum) {
  const auto& f = turtle();
  EvaluationConfig eval;
  eval.master_seed = 2024;
  const auto synth = generate_observation(f.mesh, f.table(), f.parts, sample_scenario(eval, f.nn(), 3));
  const auto cand = topk_vertex_candidates(synth.observation, f.table(), 1);
  const auto corr = aggregate_targets(f.mesh, cand, filter_matches(cand, 1e9, 1e9));
  auto worst = [&](const DepthEstimate& est) {
    double w = 0;
    for (std::size_t i = 0; i < corr.size(); ++i) {
      const double t = synth.observation.depth[static_cast<std::size_t>(corr.kept_pixels[i])];
      w = std::max(w, std::abs(est.depths[i] - t) / t);
    }
    return w;
  };
  DepthSolverOptions constant_only;
  constant_only.linear_start = false;
  try {
    EXPECT_GT(worst(estimate_depths_pairwise(synth.observation, corr, constant_only)), 0.01);
  } catch (const DepthSolveFailure& e) {
    EXPECT_GT(worst(e.best()), 0.01);
  }
  EXPECT_LT(worst(estimate_depths_pairwise(synth.observation, corr)), 1e-9);
}
