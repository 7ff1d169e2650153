#include "canonmap/geodesic.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <queue>
#include <string>

#include "canonmap/error.hpp"
#include "canonmap/parallel.hpp"

namespace canonmap {

std::size_t EdgeGraph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& nbrs : adjacency) twice += nbrs.size();
  return twice / 2;
}

double quantize_length(double meters) {
  const double q = std::round(meters / kLengthQuantum) * kLengthQuantum;
  return std::max(q, kLengthQuantum);
}

EdgeGraph build_edge_graph(const CanonicalMesh& mesh) {
  const std::size_t m = mesh.vertex_count();
  std::vector<std::vector<int>> raw(m);
  for (const auto& f : mesh.faces) {
    for (int e = 0; e < 3; ++e) {
      const int a = f[e];
      const int b = f[(e + 1) % 3];
      raw[a].push_back(b);
      raw[b].push_back(a);
    }
  }
  EdgeGraph graph;
  graph.adjacency.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    auto& nb = raw[i];
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    graph.adjacency[i].reserve(nb.size());
    for (int j : nb) {
      // The distance is computed from the ordered pair (min, max) so that both
      // directions get the bit-identical length.
      const auto lo = std::min<std::size_t>(i, static_cast<std::size_t>(j));
      const auto hi = std::max<std::size_t>(i, static_cast<std::size_t>(j));
      const double len = (mesh.vertices[hi] - mesh.vertices[lo]).norm();
      graph.adjacency[i].push_back({j, quantize_length(len)});
    }
  }
  return graph;
}

std::vector<double> geodesic_from_seed(const EdgeGraph& graph, int seed) {
  const std::size_t m = graph.vertex_count();
  if (seed < 0 || static_cast<std::size_t>(seed) >= m)
    throw Error(ErrorCode::InvalidSeed, "seed " + std::to_string(seed) + " outside [0, " + std::to_string(m) + ")");
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(m, inf);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[seed] = 0.0;
  heap.emplace(0.0, seed);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    for (const auto& nb : graph.adjacency[u]) {
      const double cand = d + nb.length;
      if (cand < dist[nb.vertex]) {
        dist[nb.vertex] = cand;
        heap.emplace(cand, nb.vertex);
      }
    }
  }
  for (std::size_t i = 0; i < m; ++i)
    if (dist[i] == inf)
      throw Error(ErrorCode::UnreachableVertex,
                  "vertex " + std::to_string(i) + " unreachable from seed " + std::to_string(seed));
  return dist;
}

GeodesicTable GeodesicTable::compute(const EdgeGraph& graph) {
  GeodesicTable table;
  table.m_ = graph.vertex_count();
  table.data_.resize(table.m_ * table.m_);
  parallel_for(table.m_, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto row = geodesic_from_seed(graph, static_cast<int>(i));
      std::transform(row.begin(), row.end(), table.data_.begin() + static_cast<std::ptrdiff_t>(i * table.m_),
                     [](double d) { return static_cast<float>(d); });
    }
  });
  return table;
}

namespace {

void write_u32_le(std::ostream& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.put(static_cast<char>((v >> (8 * b)) & 0xffu));
}

std::uint32_t read_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void GeodesicTable::save(const std::filesystem::path& path) const {
  if (m_ > std::numeric_limits<std::uint32_t>::max())
    throw Error(ErrorCode::ValidationError, "geodesic table too large for cache format");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write geodesic cache '" + path.string() + "'");
  out.write("CMGE", 4);
  write_u32_le(out, static_cast<std::uint32_t>(m_));
  for (float f : data_) write_u32_le(out, std::bit_cast<std::uint32_t>(f));
  if (!out) throw Error(ErrorCode::IoError, "failed writing geodesic cache '" + path.string() + "'");
}

GeodesicTable GeodesicTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open geodesic cache '" + path.string() + "'");
  unsigned char header[8];
  if (!in.read(reinterpret_cast<char*>(header), 8) || std::memcmp(header, "CMGE", 4) != 0)
    throw Error(ErrorCode::ParseError, "geodesic cache '" + path.string() + "' lacks CMGE header");
  GeodesicTable table;
  table.m_ = read_u32_le(header + 4);
  const std::size_t count = table.m_ * table.m_;
  std::vector<unsigned char> bytes(count * 4);
  if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size())))
    throw Error(ErrorCode::ParseError, "geodesic cache '" + path.string() + "' is truncated");
  if (in.peek() != std::char_traits<char>::eof())
    throw Error(ErrorCode::ParseError, "geodesic cache '" + path.string() + "' has trailing bytes");
  table.data_.resize(count);
  for (std::size_t k = 0; k < count; ++k) table.data_[k] = std::bit_cast<float>(read_u32_le(&bytes[4 * k]));
  return table;
}

}  // namespace canonmap
