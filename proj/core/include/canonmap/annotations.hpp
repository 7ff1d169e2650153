#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "canonmap/frame.hpp"
#include "canonmap/mesh.hpp"
#include "canonmap/rigid_pose.hpp"
#include "canonmap/spectral.hpp"

namespace canonmap {

/// Contents of `<mesh>.annot.json`.
struct Annotations {
  std::string mesh_checksum;
  std::size_t vertex_count = 0;
  std::size_t face_count = 0;
  RigidPose frame;  // raw mesh coordinates -> principal-axis frame
  SymmetryMap symmetry;
  VertexEmbeddingTable embeddings;
  Eigen::VectorXd eigenvalues;  // empty for imported tables
  double embedding_nn_median = 0.0;
  std::optional<std::string> geodesic_cache;  // file name, relative to the annotations file
};

struct AnnotateOptions {
  int dims = 16;
  int symmetry_axis = -1;  // -1 picks the best-matching axis
  EigenSolverOptions eigen;
  std::optional<VertexEmbeddingTable> imported;  // skip the spectral solve
};

Annotations annotate_mesh(const CanonicalMesh& mesh, const AnnotateOptions& options = {});

/// Checks vertex count and checksum against the mesh. Throws StaleDefinition.
void check_annotations_match(const Annotations& annotations, const CanonicalMesh& mesh);

void save_annotations(const std::filesystem::path& path, const Annotations& annotations);
Annotations load_annotations(const std::filesystem::path& path);

/// "<dir>/<stem>.annot.json" for "<dir>/<stem>.<ext>".
std::filesystem::path annotations_path_for(const std::filesystem::path& mesh_path);
std::filesystem::path geodesic_cache_path_for(const std::filesystem::path& mesh_path);

}  // namespace canonmap
