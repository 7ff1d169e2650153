#include "canonmap/correspondence.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "canonmap/error.hpp"
#include "canonmap/parallel.hpp"

namespace canonmap {
namespace {

constexpr std::size_t kPixelBlock = 32;

using Candidate = std::pair<double, int>;  // (squared distance, vertex); lexicographic order is the tie-break rule

}  // namespace

MatchCandidates topk_vertex_candidates(const EmbeddingMatrix& pixel_embeddings, const VertexEmbeddingTable& table,
                                       int k) {
  const Eigen::Index n = pixel_embeddings.rows();
  const Eigen::Index m = table.rows.rows();
  if (pixel_embeddings.cols() != table.rows.cols())
    throw Error(ErrorCode::DimensionMismatch, "pixel embedding dimension " + std::to_string(pixel_embeddings.cols()) +
                                                  " differs from vertex table dimension " +
                                                  std::to_string(table.rows.cols()));
  if (k < 1 || k > m)
    throw Error(ErrorCode::ValidationError, "K must lie in [1, " + std::to_string(m) + "], got " + std::to_string(k));

  MatchCandidates out;
  out.indices.resize(n, k);
  out.distances.resize(n, k);
  const std::size_t blocks = (static_cast<std::size_t>(n) + kPixelBlock - 1) / kPixelBlock;
  parallel_for(blocks, [&](std::size_t block_begin, std::size_t block_end) {
    std::vector<std::vector<Candidate>> heaps(kPixelBlock);
    for (std::size_t block = block_begin; block < block_end; ++block) {
      const auto first = static_cast<Eigen::Index>(block * kPixelBlock);
      const Eigen::Index last = std::min<Eigen::Index>(n, first + static_cast<Eigen::Index>(kPixelBlock));
      for (auto& h : heaps) h.clear();
      // Stream the vertex table once per pixel block; each heap is a max-heap
      // holding the best k candidates seen so far.
      for (Eigen::Index j = 0; j < m; ++j) {
        const auto vrow = table.rows.row(j);
        for (Eigen::Index i = first; i < last; ++i) {
          auto& heap = heaps[static_cast<std::size_t>(i - first)];
          const Candidate c{(pixel_embeddings.row(i) - vrow).squaredNorm(), static_cast<int>(j)};
          if (heap.size() < static_cast<std::size_t>(k)) {
            heap.push_back(c);
            std::push_heap(heap.begin(), heap.end());
          } else if (c < heap.front()) {
            std::pop_heap(heap.begin(), heap.end());
            heap.back() = c;
            std::push_heap(heap.begin(), heap.end());
          }
        }
      }
      for (Eigen::Index i = first; i < last; ++i) {
        auto& heap = heaps[static_cast<std::size_t>(i - first)];
        std::sort_heap(heap.begin(), heap.end());
        for (int c = 0; c < k; ++c) {
          out.indices(i, c) = heap[static_cast<std::size_t>(c)].second;
          out.distances(i, c) = std::sqrt(heap[static_cast<std::size_t>(c)].first);
        }
      }
    }
  });
  return out;
}

MatchCandidates topk_vertex_candidates(const Observation& obs, const VertexEmbeddingTable& table, int k) {
  return topk_vertex_candidates(obs.embeddings, table, k);
}

double row_median(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::ValidationError, "median of an empty row");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  if (sorted.size() % 2 == 1) return sorted[mid];
  return 0.5 * (sorted[mid - 1] + sorted[mid]);
}

MatchMask filter_matches(const MatchCandidates& candidates, double max_dist, double outlier_max_dist) {
  const Eigen::Index n = candidates.distances.rows();
  const Eigen::Index k = candidates.distances.cols();
  MatchMask mask;
  mask.keep.resize(n, k);
  mask.kept_count.assign(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* row = candidates.distances.data() + i * k;
    const double median = row_median({row, static_cast<std::size_t>(k)});
    for (Eigen::Index j = 0; j < k; ++j) {
      const bool good = row[j] < max_dist;
      const bool inlier = (row[j] - median) < outlier_max_dist;
      mask.keep(i, j) = static_cast<std::uint8_t>(good && inlier);
      mask.kept_count[static_cast<std::size_t>(i)] += good && inlier;
    }
  }
  return mask;
}

FilteredCorrespondences aggregate_targets(const CanonicalMesh& mesh, const MatchCandidates& candidates,
                                          const MatchMask& mask, std::optional<std::span<const int>> restrict_to) {
  const Eigen::Index n = candidates.indices.rows();
  const Eigen::Index k = candidates.indices.cols();
  if (mask.keep.rows() != n || mask.keep.cols() != k)
    throw Error(ErrorCode::DimensionMismatch, "mask shape differs from candidate shape");
  std::vector<std::uint8_t> member;
  if (restrict_to) {
    member.assign(mesh.vertex_count(), 0);
    for (int v : *restrict_to) {
      if (v < 0 || static_cast<std::size_t>(v) >= mesh.vertex_count())
        throw Error(ErrorCode::ValidationError, "restriction vertex " + std::to_string(v) + " out of range");
      member[static_cast<std::size_t>(v)] = 1;
    }
  }
  FilteredCorrespondences out;
  std::vector<int> sources;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    sources.clear();
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!mask.keep(i, j)) continue;
      const int v = candidates.indices(i, j);
      if (restrict_to && !member[static_cast<std::size_t>(v)]) continue;
      sum += mesh.vertices[static_cast<std::size_t>(v)];
      sources.push_back(v);
    }
    if (sources.empty()) {
      out.dropped_pixels.push_back(static_cast<int>(i));
      continue;
    }
    out.kept_pixels.push_back(static_cast<int>(i));
    out.targets.push_back(sum / static_cast<double>(sources.size()));
    out.source_vertices.push_back(sources);
  }
  if (out.kept_pixels.empty())
    throw Error(ErrorCode::EmptyCorrespondenceSet, "no pixel kept a candidate vertex");
  return out;
}

}  // namespace canonmap
