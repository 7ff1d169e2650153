#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "canonmap/mesh.hpp"
#include "canonmap/observation.hpp"
#include "canonmap/parts.hpp"
#include "canonmap/rigid_pose.hpp"
#include "canonmap/spectral.hpp"

namespace canonmap {

/// Rigid rotation of one part's member vertices. The pivot defaults to the
/// part centroid; an explicit pivot models a joint offset.
struct Articulation {
  std::string part;
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  double angle_rad = 0.0;
  std::optional<Eigen::Vector3d> pivot;
};

struct ScenarioConfig {
  std::string name = "scenario";
  RigidPose object_pose;                // object in camera frame
  CameraIntrinsics camera;
  std::optional<RigidPose> extrinsics;  // camera-to-world
  int pixel_budget = 500;
  double embedding_noise = 0.0;         // per-dimension std, embedding units
  double outlier_rate = 0.0;
  double depth_noise = 0.0;             // meters
  std::vector<Articulation> articulations;
  double deformation_jitter = 0.0;      // meters, per-vertex isotropic std
  std::vector<std::string> hidden_parts;  // members removed from visibility (occluder)
  std::uint64_t rng_seed = 1;

  void validate() const;
};

/// Camera 0.80 m above the support plane looking straight down, 640x480
/// pinhole, object resting at the world origin.
ScenarioConfig default_scenario();

/// Camera-to-world pose of a downward-looking camera at `height_m`.
RigidPose overhead_camera(double height_m);

struct VisibleVertex {
  int vertex = 0;
  Eigen::Vector2d pixel;
  double depth = 0.0;
};

/// Vertex-splat visibility: back-face cull on area-weighted vertex normals,
/// then a z-buffer over integer pixel cells keeping the nearest vertex.
/// Sorted by vertex index. Throws NothingVisible.
std::vector<VisibleVertex> sample_visible_vertices(const CanonicalMesh& mesh, const RigidPose& object_pose,
                                                   const CameraIntrinsics& camera);

struct NamedPose {
  std::string name;
  RigidPose pose;
};

struct SyntheticObservation {
  Observation observation;
  std::vector<int> true_vertex;       // per pixel
  std::vector<std::uint8_t> outlier;  // per pixel
  RigidPose true_object_pose;         // object in camera frame
  std::vector<NamedPose> true_part_poses;  // every registry part, camera frame
};

/// Deformation jitter, then articulations, then the rigid object pose; samples
/// up to pixel_budget visible vertices without replacement; pixel embedding is
/// the true (or, with probability outlier_rate, a random other) vertex row plus
/// Gaussian noise; depth gets Gaussian noise. Deterministic for a fixed seed.
/// Throws NothingVisible or UnknownPart.
SyntheticObservation generate_observation(const CanonicalMesh& mesh, const VertexEmbeddingTable& table,
                                          std::span<const PartDefinition> parts, const ScenarioConfig& config);

}  // namespace canonmap
