#include <gtest/gtest.h>

#include <random>

#include "canonmap/correspondence.hpp"
#include "canonmap/error.hpp"
#include "canonmap/shapes.hpp"
#include "canonmap/synth.hpp"
#include "support.hpp"

using namespace canonmap;
using namespace testing_support;

namespace {

MatchCandidates one_row(std::vector<int> idx, std::vector<double> dist) {
  MatchCandidates c;
  c.indices.resize(1, static_cast<Eigen::Index>(idx.size()));
  c.distances.resize(1, static_cast<Eigen::Index>(dist.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) {
    c.indices(0, static_cast<Eigen::Index>(j)) = idx[j];
    c.distances(0, static_cast<Eigen::Index>(j)) = dist[j];
  }
  return c;
}

EmbeddingMatrix noisy_queries(const VertexEmbeddingTable& table, int n, double sigma, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, static_cast<int>(table.vertex_count()) - 1);
  std::normal_distribution<double> noise(0.0, sigma);
  EmbeddingMatrix q(n, table.dims());
  for (int i = 0; i < n; ++i) {
    q.row(i) = table.rows.row(pick(rng));
    for (int d = 0; d < table.dims(); ++d) q(i, d) += noise(rng);
  }
  return q;
}

}  // namespace

TEST(TopK, ExactHit) {
  const auto& f = turtle();
  const EmbeddingMatrix q = f.table().rows.row(7);
  const auto c = topk_vertex_candidates(q, f.table(), 1);
  EXPECT_EQ(c.indices(0, 0), 7);
  EXPECT_EQ(c.distances(0, 0), 0.0);
}

TEST(TopK, FullRowMatchesExhaustiveSort) {
  const auto mesh = shapes::turtle(2);
  VertexEmbeddingTable table = lbo_embeddings(mesh, 8).table;
  std::mt19937_64 rng(1);
  const auto q = noisy_queries(table, 1, 0.05, rng);
  const int m = static_cast<int>(table.vertex_count());
  const auto c = topk_vertex_candidates(q, table, m);
  const auto expect = oracle::sorted_distances(table.rows, q.row(0));
  for (int j = 0; j < m; ++j) {
    ASSERT_EQ(c.indices(0, j), expect[static_cast<std::size_t>(j)].second) << j;
    ASSERT_NEAR(c.distances(0, j), expect[static_cast<std::size_t>(j)].first, 1e-12);
  }
}

TEST(TopK, ManyPixelsMatchOracleAndRowsAscend) {
  const auto& f = turtle();
  std::mt19937_64 rng(2);
  const auto q = noisy_queries(f.table(), 200, 0.5 * f.nn(), rng);
  const auto c = topk_vertex_candidates(q, f.table(), 5);
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    const auto expect = oracle::sorted_distances(f.table().rows, q.row(i));
    for (int j = 0; j < 5; ++j) {
      ASSERT_EQ(c.indices(i, j), expect[static_cast<std::size_t>(j)].second);
      if (j > 0) ASSERT_LE(c.distances(i, j - 1), c.distances(i, j));
    }
  }
}

TEST(TopK, TiesGoToLowerIndex) {
  VertexEmbeddingTable table;
  table.rows.resize(4, 2);
  table.rows << 5, 5, 1, 0, 9, 9, 1, 0;  // vertices 1 and 3 identical
  const EmbeddingMatrix q = Eigen::RowVector2d(1, 0);
  const auto c = topk_vertex_candidates(q, table, 2);
  EXPECT_EQ(c.indices(0, 0), 1);
  EXPECT_EQ(c.indices(0, 1), 3);
}

TEST(TopK, Errors) {
  const auto& f = turtle();
  const EmbeddingMatrix wrong = EmbeddingMatrix::Zero(2, 3);
  try {
    topk_vertex_candidates(wrong, f.table(), 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
  const EmbeddingMatrix ok = f.table().rows.topRows(1);
  EXPECT_THROW(topk_vertex_candidates(ok, f.table(), 0), Error);
  EXPECT_THROW(topk_vertex_candidates(ok, f.table(), static_cast<int>(f.mesh.vertex_count()) + 1), Error);
}

TEST(Mask, HandEvaluatedRow) {
  const auto mask = filter_matches(one_row({0, 1, 2}, {0.1, 0.2, 0.9}), 0.5, 0.5);
  EXPECT_EQ(mask.keep(0, 0), 1);
  EXPECT_EQ(mask.keep(0, 1), 1);
  EXPECT_EQ(mask.keep(0, 2), 0);
  EXPECT_EQ(mask.kept_count[0], 2);
}

TEST(Mask, InactiveAndTotalRejection) {
  const auto c = one_row({0, 1, 2, 3}, {0.1, 0.4, 0.5, 3.0});
  EXPECT_EQ(filter_matches(c, 1e9, 1e9).kept_count[0], 4);
  EXPECT_EQ(filter_matches(c, 0.05, 1e9).kept_count[0], 0);
}

TEST(Mask, EvenMedianIsMeanOfMiddle) {
  EXPECT_EQ(row_median(std::vector<double>{4, 1, 3, 2}), 2.5);
  EXPECT_EQ(row_median(std::vector<double>{3, 1, 2}), 2.0);
  // D - 0.45 < 0.3 keeps 0.1, 0.4, 0.5 (median of 0.1, 0.4, 0.5, 3.0 is 0.45).
  const auto mask = filter_matches(one_row({0, 1, 2, 3}, {0.1, 0.4, 0.5, 3.0}), 10.0, 0.3);
  EXPECT_EQ(mask.kept_count[0], 3);
  EXPECT_EQ(mask.keep(0, 3), 0);
}

TEST(Mask, MonotoneInThresholds) {
  const auto& f = turtle();
  std::mt19937_64 rng(4);
  const auto c = topk_vertex_candidates(noisy_queries(f.table(), 300, f.nn(), rng), f.table(), 5);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int t = 0; t < 20; ++t) {
    const double a0 = u(rng) * f.nn(), a1 = u(rng) * f.nn();
    const auto small = filter_matches(c, a0, a1);
    const auto big = filter_matches(c, a0 * 1.5, a1 * 1.2);
    for (Eigen::Index i = 0; i < small.keep.size(); ++i) ASSERT_LE(small.keep.data()[i], big.keep.data()[i]);
  }
}

TEST(Aggregate, MeanOfTwo) {
  CanonicalMesh mesh;
  mesh.vertices = {{0, 0, 0}, {2, 0, 0}, {0, 1, 0}};
  mesh.faces = {{0, 1, 2}};
  const auto c = one_row({0, 1}, {0.1, 0.1});
  const auto corr = aggregate_targets(mesh, c, filter_matches(c, 1, 1));
  ASSERT_EQ(corr.size(), 1u);
  EXPECT_EQ(corr.targets[0], Eigen::Vector3d(1, 0, 0));
  EXPECT_EQ(corr.source_vertices[0], (std::vector<int>{0, 1}));
}

TEST(Aggregate, RestrictionDropsPixelsAndEmptyThrows) {
  CanonicalMesh mesh;
  mesh.vertices = {{0, 0, 0}, {2, 0, 0}, {0, 1, 0}};
  mesh.faces = {{0, 1, 2}};
  MatchCandidates c;
  c.indices.resize(2, 1);
  c.distances.resize(2, 1);
  c.indices << 0, 1;
  c.distances << 0.1, 0.1;
  const auto mask = filter_matches(c, 1, 1);
  const std::vector<int> only1{1};
  const auto corr = aggregate_targets(mesh, c, mask, std::span<const int>(only1));
  EXPECT_EQ(corr.kept_pixels, (std::vector<int>{1}));
  EXPECT_EQ(corr.dropped_pixels, (std::vector<int>{0}));
  const std::vector<int> only2{2};
  try {
    aggregate_targets(mesh, c, mask, std::span<const int>(only2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyCorrespondenceSet);
  }
}

TEST(Aggregate, MatchesIndependentRecomputation) {
  const auto& f = turtle();
  std::mt19937_64 rng(6);
  const auto c = topk_vertex_candidates(noisy_queries(f.table(), 100, 0.5 * f.nn(), rng), f.table(), 5);
  const double t0 = 3.0 * f.nn(), t1 = 0.5 * f.nn();
  for (const std::vector<int>* restrict : {static_cast<const std::vector<int>*>(nullptr), &f.part("back").members}) {
    std::vector<int> kept;
    const auto expect = oracle::aggregate(f.mesh, c, t0, t1, restrict, kept);
    ASSERT_FALSE(kept.empty());
    const auto mask = filter_matches(c, t0, t1);
    const auto corr = restrict ? aggregate_targets(f.mesh, c, mask, std::span<const int>(*restrict))
                               : aggregate_targets(f.mesh, c, mask);
    ASSERT_EQ(corr.kept_pixels, kept);
    for (std::size_t i = 0; i < kept.size(); ++i) EXPECT_LT((corr.targets[i] - expect[i]).norm(), 1e-15);
  }
}

TEST(Aggregate, TargetsInsideBoundingBox) {
  const auto& f = turtle();
  std::mt19937_64 rng(8);
  const auto c = topk_vertex_candidates(noisy_queries(f.table(), 300, f.nn(), rng), f.table(), 5);
  const auto corr = aggregate_targets(f.mesh, c, filter_matches(c, 1e9, 1e9));
  const auto box = bounding_box(f.mesh);
  for (const auto& t : corr.targets) EXPECT_TRUE(box.contains(t));
}

TEST(Aggregate, OnesMaskWithKOneIsLookup) {
  const auto& f = turtle();
  std::mt19937_64 rng(9);
  const auto c = topk_vertex_candidates(noisy_queries(f.table(), 100, f.nn(), rng), f.table(), 1);
  const auto corr = aggregate_targets(f.mesh, c, filter_matches(c, 1e9, 1e9));
  for (std::size_t i = 0; i < corr.size(); ++i)
    EXPECT_EQ(corr.targets[i], f.mesh.vertices[static_cast<std::size_t>(c.indices(static_cast<Eigen::Index>(i), 0))]);
}

TEST(Aggregate, RestrictionCommutesWithMask) {
  const auto& f = turtle();
  std::mt19937_64 rng(10);
  const auto c = topk_vertex_candidates(noisy_queries(f.table(), 300, f.nn(), rng), f.table(), 5);
  const auto& members = f.part("left hand").members;
  const auto mask = filter_matches(c, 5 * f.nn(), f.nn());
  // Masking first, then restricting...
  const auto a = aggregate_targets(f.mesh, c, mask, std::span<const int>(members));
  // ...equals folding the membership indicator into the mask up front.
  MatchMask folded = mask;
  for (Eigen::Index i = 0; i < c.indices.rows(); ++i) {
    folded.kept_count[static_cast<std::size_t>(i)] = 0;
    for (Eigen::Index j = 0; j < c.indices.cols(); ++j) {
      const bool member = std::binary_search(members.begin(), members.end(), c.indices(i, j));
      folded.keep(i, j) = folded.keep(i, j) && member;
      folded.kept_count[static_cast<std::size_t>(i)] += folded.keep(i, j);
    }
  }
  const auto b = aggregate_targets(f.mesh, c, folded);
  EXPECT_EQ(a.kept_pixels, b.kept_pixels);
  EXPECT_EQ(a.targets, b.targets);
}

TEST(Matching, NoiselessTopOneIsTrueVertex) {
  const auto& f = turtle();
  ScenarioConfig cfg = default_scenario();
  cfg.pixel_budget = 100000;
  const auto synth = generate_observation(f.mesh, f.table(), f.parts, cfg);
  const auto c = topk_vertex_candidates(synth.observation, f.table(), 1);
  for (std::size_t i = 0; i < synth.true_vertex.size(); ++i)
    ASSERT_EQ(c.indices(static_cast<Eigen::Index>(i), 0), synth.true_vertex[i]);
}

TEST(MatchConfig, DataRelativeDefaults) {
  MatchConfig cfg;
  EXPECT_EQ(cfg.k, 5);
  EXPECT_EQ(cfg.resolved_max_dist(0.2), 1.0);
  EXPECT_EQ(cfg.resolved_outlier_max_dist(0.2), 0.2);
  cfg.max_dist = 0.7;
  EXPECT_EQ(cfg.resolved_max_dist(0.2), 0.7);
}
