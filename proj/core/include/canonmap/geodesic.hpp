#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "canonmap/mesh.hpp"

namespace canonmap {

struct Neighbor {
  int vertex = 0;
  double length = 0.0;  // meters
};

/// Undirected mesh edge graph. Edge lengths are snapped to multiples of
/// kLengthQuantum, so any sum of them (below 2^13 m) is exact in double and
/// shortest-path values do not depend on summation order.
struct EdgeGraph {
  std::vector<std::vector<Neighbor>> adjacency;  // sorted by neighbor index

  std::size_t vertex_count() const { return adjacency.size(); }
  std::size_t edge_count() const;
};

inline constexpr double kLengthQuantum = 0x1p-40;

double quantize_length(double meters);

EdgeGraph build_edge_graph(const CanonicalMesh& mesh);

/// Dijkstra distances from `seed` over the edge graph. Throws InvalidSeed or
/// UnreachableVertex (disconnected graph).
std::vector<double> geodesic_from_seed(const EdgeGraph& graph, int seed);

/// Dense all-pairs geodesic distances, float32 row-major. For a scanned mesh
/// (25K vertices) this is 2.5 GB, so callers normally use
/// geodesic_from_seed rows and only materialize the table for small meshes or
/// as a disk cache.
class GeodesicTable {
 public:
  GeodesicTable() = default;

  static GeodesicTable compute(const EdgeGraph& graph);

  std::size_t size() const { return m_; }
  float at(std::size_t i, std::size_t j) const { return data_[i * m_ + j]; }
  const float* row(std::size_t i) const { return data_.data() + i * m_; }

  /// Cache layout: ASCII magic "CMGE", u32 m (little-endian), then m*m
  /// float32 little-endian, row-major.
  void save(const std::filesystem::path& path) const;
  static GeodesicTable load(const std::filesystem::path& path);

 private:
  std::size_t m_ = 0;
  std::vector<float> data_;
};

}  // namespace canonmap
