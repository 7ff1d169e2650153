#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "canonmap/geodesic.hpp"
#include "canonmap/mesh.hpp"
#include "canonmap/rigid_pose.hpp"

namespace canonmap {

/// Named vertex group: every vertex within `threshold` (geodesic meters) of
/// `seed`. A single-vertex part is a grasp point.
struct PartDefinition {
  std::string name;
  int seed = 0;
  double threshold = 0.0;
  std::vector<int> members;  // ascending
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  nlohmann::json meta;       // opaque, preserved across save/load

  bool operator==(const PartDefinition& rhs) const {
    return name == rhs.name && seed == rhs.seed && threshold == rhs.threshold && members == rhs.members &&
           centroid == rhs.centroid && meta == rhs.meta;
  }
};

/// Throws InvalidSeed (seed out of range, negative or non-finite threshold).
PartDefinition grow_part(const CanonicalMesh& mesh, const EdgeGraph& graph, int seed, double threshold,
                         std::string name);

/// Part frame in the canonical frame: origin at the centroid, identity rotation.
RigidPose part_frame(const PartDefinition& part);

/// Parts file contents, keyed by the mesh checksum it was authored against.
struct PartsFile {
  std::string mesh_checksum;
  std::vector<PartDefinition> parts;
};

nlohmann::json parts_to_json(const PartsFile& file);

struct LoadedParts {
  PartsFile file;
  bool members_rewritten = false;  // some cached member list was stale and got recomputed
};

/// Parses and revalidates a parts document against the mesh. A checksum or
/// vertex-count mismatch is StaleDefinition; a member cache that disagrees with
/// seed + threshold is recomputed and flagged. Throws SchemaError on bad shape.
LoadedParts parts_from_json(const nlohmann::json& doc, const CanonicalMesh& mesh, const EdgeGraph& graph);

LoadedParts load_parts(const std::filesystem::path& path, const CanonicalMesh& mesh, const EdgeGraph& graph);

/// Writes to a sibling temporary file and renames it over `path`.
void save_parts(const std::filesystem::path& path, const PartsFile& file);

/// Thread-safe part store: many readers, one writer at a time. Names are
/// unique, case-sensitive keys.
class PartRegistry {
 public:
  PartRegistry() = default;
  explicit PartRegistry(std::vector<PartDefinition> parts);

  /// Returns false if the name already exists.
  bool add(PartDefinition part);
  /// Inserts or replaces.
  void put(PartDefinition part);
  bool remove(const std::string& name);
  std::optional<PartDefinition> find(const std::string& name) const;
  std::vector<PartDefinition> snapshot() const;  // name order
  std::size_t size() const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, PartDefinition> parts_;
};

}  // namespace canonmap
