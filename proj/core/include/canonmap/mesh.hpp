#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace canonmap {

using Face = std::array<int, 3>;

/// Reference triangle mesh. Vertex indices are the stable identity that every
/// annotation (embeddings, parts, geodesics) is keyed on, so loaders must
/// preserve file order.
struct CanonicalMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<Face> faces;
  std::vector<Eigen::Vector3d> colors;  // empty, or one RGB in [0, 1] per vertex

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t face_count() const { return faces.size(); }
};

/// Checks index range, degenerate faces, finite coordinates, color count and
/// single-component connectivity. Throws ValidationError.
void validate_mesh(const CanonicalMesh& mesh);

/// Number of connected components of the face graph (isolated vertices count).
std::size_t connected_components(const CanonicalMesh& mesh);

enum class MeshFormat { Obj, Ply };

/// Reads and validates a mesh. The format is taken from the extension unless
/// given. Throws ParseError (with line or byte offset), ValidationError, IoError.
CanonicalMesh parse_mesh(const std::filesystem::path& path,
                         std::optional<MeshFormat> format = std::nullopt);

// Stream parsers; these do not validate.
CanonicalMesh read_obj(std::istream& in);
CanonicalMesh read_ply(std::istream& in);

void write_obj(std::ostream& out, const CanonicalMesh& mesh);
void write_ply(std::ostream& out, const CanonicalMesh& mesh, bool binary = false);
void save_mesh(const std::filesystem::path& path, const CanonicalMesh& mesh);

/// 64-bit FNV-1a over the vertex buffer: for each vertex in order, the x, y, z
/// coordinates as IEEE-754 binary64 in little-endian byte order (24 bytes per
/// vertex). Offset basis 0xcbf29ce484222325, prime 0x100000001b3.
std::uint64_t mesh_checksum(const CanonicalMesh& mesh);

/// Lowercase 16-digit hex.
std::string checksum_hex(std::uint64_t checksum);

Eigen::AlignedBox3d bounding_box(const CanonicalMesh& mesh);

/// Area-weighted vertex normals (unit length; zero for isolated vertices).
std::vector<Eigen::Vector3d> vertex_normals(const CanonicalMesh& mesh);

}  // namespace canonmap
