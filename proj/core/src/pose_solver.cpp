#include "canonmap/pose_solver.hpp"

#include <string>

#include "canonmap/error.hpp"

namespace canonmap {

std::vector<Eigen::Vector3d> unproject_pixels(const Observation& obs, std::span<const int> pixels) {
  if (!obs.has_depth()) throw Error(ErrorCode::MissingDepth, "observation has no depth channel");
  std::vector<Eigen::Vector3d> points;
  points.reserve(pixels.size());
  for (int px : pixels) {
    if (px < 0 || static_cast<std::size_t>(px) >= obs.depth.size())
      throw Error(ErrorCode::MissingDepth, "no depth for pixel " + std::to_string(px));
    const double z = obs.depth[static_cast<std::size_t>(px)];
    if (!(z > 0.0)) throw Error(ErrorCode::NonPositiveDepth, "pixel " + std::to_string(px) + " has depth <= 0");
    const Eigen::Vector2d& uv = obs.pixels[static_cast<std::size_t>(px)];
    points.emplace_back((uv.x() - obs.intrinsics.cx) * z / obs.intrinsics.fx,
                        (uv.y() - obs.intrinsics.cy) * z / obs.intrinsics.fy, z);
  }
  return points;
}

std::string_view to_string(DepthMode mode) { return mode == DepthMode::Sensor ? "sensor" : "pairwise"; }

DepthMode depth_mode_from_string(std::string_view s) {
  if (s == "sensor") return DepthMode::Sensor;
  if (s == "pairwise") return DepthMode::Pairwise;
  throw Error(ErrorCode::ValidationError, "unknown depth mode '" + std::string(s) + "'");
}

std::string_view to_string(PartPoseMode mode) {
  return mode == PartPoseMode::Fitted ? "fitted" : "rigid-fallback";
}

namespace {

struct FitOutcome {
  RigidFit fit;
  int inliers = 0;
};

FitOutcome fit_points(std::span<const Eigen::Vector3d> camera_points, std::span<const Eigen::Vector3d> targets,
                      const PoseConfig& config) {
  if (config.robust) {
    auto robust = fit_rigid_transform_robust(camera_points, targets, config.robust_options, config.with_scale);
    return {robust.fit, static_cast<int>(robust.inliers.size())};
  }
  return {fit_rigid_transform(camera_points, targets, config.with_scale), static_cast<int>(camera_points.size())};
}

}  // namespace

PoseResult solve_poses(const Observation& obs, const CanonicalMesh& mesh, const VertexEmbeddingTable& table,
                       std::span<const PartDefinition> parts, const PoseConfig& config, double nn_median) {
  validate_observation(obs, table.dims());
  validate_embedding_table(table, mesh.vertex_count());
  if (config.depth_mode == DepthMode::Sensor && !obs.has_depth())
    throw Error(ErrorCode::MissingDepth, "sensor depth mode requires a depth channel");

  const MatchCandidates candidates = topk_vertex_candidates(obs, table, config.match.k);
  const MatchMask mask = filter_matches(candidates, config.match.resolved_max_dist(nn_median),
                                        config.match.resolved_outlier_max_dist(nn_median));
  const FilteredCorrespondences corr = aggregate_targets(mesh, candidates, mask);

  PoseResult result;
  result.kept_pixels = static_cast<int>(corr.size());

  // Camera-frame point per observation pixel (only kept pixels are filled).
  std::vector<Eigen::Vector3d> camera_point(obs.pixel_count(), Eigen::Vector3d::Zero());
  std::vector<Eigen::Vector3d> object_points;
  if (config.depth_mode == DepthMode::Sensor) {
    object_points = unproject_pixels(obs, corr.kept_pixels);
  } else {
    const DepthEstimate depths = estimate_depths_pairwise(obs, corr, config.depth);
    result.estimated_depths = depths.depths;
    object_points.reserve(corr.size());
    for (std::size_t i = 0; i < corr.size(); ++i) {
      const auto px = static_cast<std::size_t>(corr.kept_pixels[i]);
      object_points.push_back(depths.depths[i] * pixel_ray(obs.intrinsics, obs.pixels[px]));
    }
  }
  for (std::size_t i = 0; i < corr.size(); ++i)
    camera_point[static_cast<std::size_t>(corr.kept_pixels[i])] = object_points[i];

  const FitOutcome object_fit = fit_points(object_points, corr.targets, config);
  result.solver_transform = object_fit.fit.transform;
  result.object_pose = object_fit.fit.transform.inverse();
  result.scale = object_fit.fit.scale;
  result.residual_rms = object_fit.fit.rms;
  result.inlier_count = object_fit.inliers;

  for (const auto& part : parts) {
    PartPose out;
    out.name = part.name;
    const RigidPose frame = part_frame(part);
    try {
      const FilteredCorrespondences part_corr =
          aggregate_targets(mesh, candidates, mask, std::span<const int>(part.members));
      out.pixels = static_cast<int>(part_corr.size());
      if (out.pixels >= config.min_part_pixels) {
        std::vector<Eigen::Vector3d> points;
        points.reserve(part_corr.size());
        for (int px : part_corr.kept_pixels) points.push_back(camera_point[static_cast<std::size_t>(px)]);
        const FitOutcome part_fit = fit_points(points, part_corr.targets, config);
        out.pose = part_fit.fit.transform.inverse() * frame;
        out.mode = PartPoseMode::Fitted;
        out.residual_rms = part_fit.fit.rms;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyCorrespondenceSet && e.code() != ErrorCode::DegenerateConfiguration &&
          e.code() != ErrorCode::InsufficientPixels)
        throw;
    }
    if (out.mode == PartPoseMode::RigidFallback) out.pose = result.object_pose * frame;
    result.parts.push_back(std::move(out));
  }
  return result;
}

}  // namespace canonmap
