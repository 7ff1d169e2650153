#include "canonmap/annotations.hpp"

#include "canonmap/error.hpp"
#include "canonmap/io.hpp"

namespace canonmap {

Annotations annotate_mesh(const CanonicalMesh& mesh, const AnnotateOptions& options) {
  validate_mesh(mesh);
  Annotations a;
  a.mesh_checksum = checksum_hex(mesh_checksum(mesh));
  a.vertex_count = mesh.vertex_count();
  a.face_count = mesh.face_count();
  a.frame = assign_canonical_frame(mesh);
  a.symmetry = options.symmetry_axis < 0 ? compute_best_symmetry_map(mesh, a.frame)
                                         : compute_symmetry_map(mesh, a.frame, options.symmetry_axis);
  if (options.imported) {
    a.embeddings = *options.imported;
    a.embeddings.provenance = EmbeddingProvenance::Imported;
    validate_embedding_table(a.embeddings, mesh.vertex_count());
  } else {
    SpectralEmbedding spectral = lbo_embeddings(mesh, options.dims, options.eigen);
    a.embeddings = std::move(spectral.table);
    a.eigenvalues = spectral.spectrum.eigenvalues;
  }
  a.embedding_nn_median = median_nn_distance(a.embeddings);
  return a;
}

void check_annotations_match(const Annotations& annotations, const CanonicalMesh& mesh) {
  if (annotations.vertex_count != mesh.vertex_count() ||
      annotations.mesh_checksum != checksum_hex(mesh_checksum(mesh)))
    throw Error(ErrorCode::StaleDefinition, "annotations were computed for a different mesh (" +
                                                annotations.mesh_checksum + ")");
  validate_embedding_table(annotations.embeddings, mesh.vertex_count());
}

void save_annotations(const std::filesystem::path& path, const Annotations& annotations) {
  io::write_json_file(path, io::annotations_to_json(annotations));
}

Annotations load_annotations(const std::filesystem::path& path) {
  return io::annotations_from_json(io::read_json_file(path));
}

std::filesystem::path annotations_path_for(const std::filesystem::path& mesh_path) {
  auto p = mesh_path;
  p.replace_extension(".annot.json");
  return p;
}

std::filesystem::path geodesic_cache_path_for(const std::filesystem::path& mesh_path) {
  auto p = mesh_path;
  p.replace_extension(".geo.bin");
  return p;
}

}  // namespace canonmap
