#include "canonmap/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <unordered_map>

#include "canonmap/error.hpp"

namespace canonmap {

void ScenarioConfig::validate() const {
  camera.validate();
  if (pixel_budget < 1) throw Error(ErrorCode::ValidationError, "pixel budget must be >= 1");
  if (!(outlier_rate >= 0.0 && outlier_rate <= 1.0))
    throw Error(ErrorCode::ValidationError, "outlier rate must lie in [0, 1]");
  if (!(embedding_noise >= 0.0) || !(depth_noise >= 0.0) || !(deformation_jitter >= 0.0))
    throw Error(ErrorCode::ValidationError, "noise standard deviations must be >= 0");
  for (const auto& a : articulations)
    if (!(a.axis.norm() > 0.0)) throw Error(ErrorCode::ValidationError, "articulation axis must be nonzero");
}

RigidPose overhead_camera(double height_m) {
  Eigen::Matrix3d r;
  // Columns: camera x, y, z axes in world coordinates (z looks down).
  r << 1, 0, 0,
       0, -1, 0,
       0, 0, -1;
  return {r, Eigen::Vector3d(0, 0, height_m)};
}

ScenarioConfig default_scenario() {
  ScenarioConfig cfg;
  cfg.extrinsics = overhead_camera(0.80);
  cfg.object_pose = cfg.extrinsics->inverse();  // object frame at the world origin
  return cfg;
}

std::vector<VisibleVertex> sample_visible_vertices(const CanonicalMesh& mesh, const RigidPose& object_pose,
                                                   const CameraIntrinsics& camera) {
  camera.validate();
  const auto normals = vertex_normals(mesh);
  std::unordered_map<long long, VisibleVertex> zbuffer;
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
    const Eigen::Vector3d p = object_pose * mesh.vertices[i];
    if (!(p.z() > 0.0)) continue;
    const Eigen::Vector3d n = object_pose.rotation() * normals[i];
    if (!(n.dot(p) < 0.0)) continue;  // back-facing
    const Eigen::Vector2d uv(camera.fx * p.x() / p.z() + camera.cx, camera.fy * p.y() / p.z() + camera.cy);
    if (!(uv.x() >= 0.0 && uv.x() < camera.width && uv.y() >= 0.0 && uv.y() < camera.height)) continue;
    const long long cell = static_cast<long long>(std::floor(uv.y())) * camera.width +
                           static_cast<long long>(std::floor(uv.x()));
    const VisibleVertex cand{static_cast<int>(i), uv, p.z()};
    auto [it, inserted] = zbuffer.try_emplace(cell, cand);
    if (!inserted && (cand.depth < it->second.depth ||
                      (cand.depth == it->second.depth && cand.vertex < it->second.vertex)))
      it->second = cand;
  }
  if (zbuffer.empty()) throw Error(ErrorCode::NothingVisible, "no mesh vertex is visible from the camera");
  std::vector<VisibleVertex> out;
  out.reserve(zbuffer.size());
  for (const auto& [_, v] : zbuffer) out.push_back(v);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.vertex < b.vertex; });
  return out;
}

SyntheticObservation generate_observation(const CanonicalMesh& mesh, const VertexEmbeddingTable& table,
                                          std::span<const PartDefinition> parts, const ScenarioConfig& config) {
  config.validate();
  validate_embedding_table(table, mesh.vertex_count());
  auto find_part = [&](const std::string& name) -> const PartDefinition& {
    for (const auto& p : parts)
      if (p.name == name) return p;
    throw Error(ErrorCode::UnknownPart, "unknown part '" + name + "'");
  };

  std::mt19937_64 rng(config.rng_seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  CanonicalMesh posed = mesh;
  if (config.deformation_jitter > 0.0)
    for (auto& v : posed.vertices)
      for (int a = 0; a < 3; ++a) v[a] += config.deformation_jitter * normal(rng);

  SyntheticObservation out;
  out.true_object_pose = config.object_pose;
  std::unordered_map<std::string, RigidPose> articulation_of;
  for (const auto& art : config.articulations) {
    const PartDefinition& part = find_part(art.part);
    const Eigen::Matrix3d r = axis_angle_rotation(art.axis, art.angle_rad);
    const Eigen::Vector3d pivot = art.pivot.value_or(part.centroid);
    const RigidPose motion(r, pivot - r * pivot);
    for (int v : part.members) posed.vertices[static_cast<std::size_t>(v)] = motion * posed.vertices[static_cast<std::size_t>(v)];
    auto [it, inserted] = articulation_of.try_emplace(art.part, motion);
    if (!inserted) it->second = motion * it->second;
  }
  for (const auto& part : parts) {
    RigidPose motion;
    if (auto it = articulation_of.find(part.name); it != articulation_of.end()) motion = it->second;
    out.true_part_poses.push_back({part.name, config.object_pose * motion * part_frame(part)});
  }

  std::vector<VisibleVertex> visible = sample_visible_vertices(posed, config.object_pose, config.camera);
  if (!config.hidden_parts.empty()) {
    std::vector<std::uint8_t> hidden(mesh.vertex_count(), 0);
    for (const auto& name : config.hidden_parts)
      for (int v : find_part(name).members) hidden[static_cast<std::size_t>(v)] = 1;
    std::erase_if(visible, [&](const VisibleVertex& vv) { return hidden[static_cast<std::size_t>(vv.vertex)] != 0; });
    if (visible.empty()) throw Error(ErrorCode::NothingVisible, "every visible vertex belongs to a hidden part");
  }

  // Partial Fisher-Yates draw without replacement, then restore vertex order.
  const std::size_t n = std::min(visible.size(), static_cast<std::size_t>(config.pixel_budget));
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, visible.size() - 1);
    std::swap(visible[i], visible[pick(rng)]);
  }
  visible.resize(n);
  std::sort(visible.begin(), visible.end(), [](const auto& a, const auto& b) { return a.vertex < b.vertex; });

  Observation& obs = out.observation;
  obs.intrinsics = config.camera;
  obs.extrinsics = config.extrinsics;
  obs.pixels.reserve(n);
  obs.depth.reserve(n);
  obs.embeddings.resize(static_cast<Eigen::Index>(n), table.dims());
  const auto m = static_cast<int>(mesh.vertex_count());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> other(0, m - 2);
  for (std::size_t i = 0; i < n; ++i) {
    const VisibleVertex& vv = visible[i];
    int source = vv.vertex;
    const bool is_outlier = config.outlier_rate > 0.0 && unit(rng) < config.outlier_rate;
    if (is_outlier) {
      source = other(rng);
      if (source >= vv.vertex) ++source;
    }
    auto row = obs.embeddings.row(static_cast<Eigen::Index>(i));
    row = table.rows.row(source);
    if (config.embedding_noise > 0.0)
      for (Eigen::Index c = 0; c < row.size(); ++c) row(c) += config.embedding_noise * normal(rng);
    double depth = vv.depth;
    if (config.depth_noise > 0.0) depth = std::max(1e-6, depth + config.depth_noise * normal(rng));
    obs.pixels.push_back(vv.pixel);
    obs.depth.push_back(depth);
    out.true_vertex.push_back(vv.vertex);
    out.outlier.push_back(is_outlier ? 1 : 0);
  }
  return out;
}

}  // namespace canonmap
