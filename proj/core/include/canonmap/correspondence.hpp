#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "canonmap/mesh.hpp"
#include "canonmap/observation.hpp"
#include "canonmap/spectral.hpp"

namespace canonmap {

/// Top-K vertex candidates per pixel, ascending embedding distance.
struct MatchCandidates {
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> indices;     // n x K
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> distances;  // n x K

  std::size_t pixel_count() const { return static_cast<std::size_t>(indices.rows()); }
  int k() const { return static_cast<int>(indices.cols()); }
};

/// Exact brute-force K-nearest vertex embeddings for every pixel. Ties are
/// broken by lower vertex index. Throws DimensionMismatch or ValidationError.
MatchCandidates topk_vertex_candidates(const EmbeddingMatrix& pixel_embeddings,
                                       const VertexEmbeddingTable& table, int k);
MatchCandidates topk_vertex_candidates(const Observation& obs, const VertexEmbeddingTable& table, int k);

struct MatchMask {
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> keep;  // n x K
  std::vector<int> kept_count;
};

/// Median of a row; even counts average the two middle values.
double row_median(std::span<const double> values);

/// keep = [D < max_dist] * [D - median(row) < outlier_max_dist].
MatchMask filter_matches(const MatchCandidates& candidates, double max_dist, double outlier_max_dist);

struct FilteredCorrespondences {
  std::vector<int> kept_pixels;                  // ascending pixel index
  std::vector<Eigen::Vector3d> targets;          // mean of surviving candidate vertices
  std::vector<std::vector<int>> source_vertices; // surviving candidates per kept pixel
  std::vector<int> dropped_pixels;               // zero surviving candidates

  std::size_t size() const { return kept_pixels.size(); }
};

/// Averages the masked candidates of each pixel. With `restrict_to` (sorted
/// vertex indices) a candidate must also be a member. Throws
/// EmptyCorrespondenceSet if no pixel survives.
FilteredCorrespondences aggregate_targets(const CanonicalMesh& mesh, const MatchCandidates& candidates,
                                          const MatchMask& mask,
                                          std::optional<std::span<const int>> restrict_to = std::nullopt);

/// K and thresholds for steps 1-2. Thresholds left unset are derived from the
/// median nearest-neighbor distance of the vertex table (5x and 1x).
struct MatchConfig {
  int k = 5;
  std::optional<double> max_dist;
  std::optional<double> outlier_max_dist;
  double max_dist_factor = 5.0;
  double outlier_factor = 1.0;

  double resolved_max_dist(double nn_median) const { return max_dist.value_or(max_dist_factor * nn_median); }
  double resolved_outlier_max_dist(double nn_median) const {
    return outlier_max_dist.value_or(outlier_factor * nn_median);
  }
};

}  // namespace canonmap
