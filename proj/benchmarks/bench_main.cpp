#include <map>
#include <numeric>
#include <random>

#include <benchmark/benchmark.h>

#include "canonmap/annotations.hpp"
#include "canonmap/correspondence.hpp"
#include "canonmap/depth_free.hpp"
#include "canonmap/geodesic.hpp"
#include "canonmap/parts.hpp"
#include "canonmap/pose_solver.hpp"
#include "canonmap/rigid_fit.hpp"
#include "canonmap/shapes.hpp"
#include "canonmap/spectral.hpp"
#include "canonmap/synth.hpp"

using namespace canonmap;

namespace {

struct Turtle {
  CanonicalMesh mesh;
  EdgeGraph graph;
  Annotations annotations;
  std::vector<PartDefinition> parts;
};

const Turtle& turtle(int subdiv) {
  static std::map<int, Turtle> cache;
  auto it = cache.find(subdiv);
  if (it != cache.end()) return it->second;
  Turtle t;
  t.mesh = shapes::turtle(subdiv);
  t.graph = build_edge_graph(t.mesh);
  t.annotations = annotate_mesh(t.mesh);
  for (const auto& a : shapes::turtle_part_anchors())
    t.parts.push_back(grow_part(t.mesh, t.graph, shapes::anchor_vertex(t.mesh, a.direction), a.threshold_m, a.name));
  return cache.emplace(subdiv, std::move(t)).first->second;
}

SyntheticObservation observe(const Turtle& t, int pixels) {
  auto cfg = default_scenario();
  cfg.pixel_budget = pixels;
  cfg.embedding_noise = 0.5 * t.annotations.embedding_nn_median;
  cfg.outlier_rate = 0.3;
  return generate_observation(t.mesh, t.annotations.embeddings, t.parts, cfg);
}

}  // namespace

static void BM_TopK(benchmark::State& state) {
  const auto& t = turtle(static_cast<int>(state.range(0)));
  const auto synth = observe(t, 500);
  for (auto _ : state)
    benchmark::DoNotOptimize(topk_vertex_candidates(synth.observation, t.annotations.embeddings, 5));
  state.counters["vertices"] = static_cast<double>(t.mesh.vertex_count());
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(synth.observation.pixel_count()));
}
BENCHMARK(BM_TopK)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_GeodesicRow(benchmark::State& state) {
  const auto& t = turtle(static_cast<int>(state.range(0)));
  int seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(geodesic_from_seed(t.graph, seed));
    seed = (seed + 97) % static_cast<int>(t.mesh.vertex_count());
  }
  state.counters["vertices"] = static_cast<double>(t.mesh.vertex_count());
}
BENCHMARK(BM_GeodesicRow)->Arg(3)->Arg(4)->Arg(5)->Unit(benchmark::kMicrosecond);

static void BM_GeodesicTable(benchmark::State& state) {
  const auto& t = turtle(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(GeodesicTable::compute(t.graph));
}
BENCHMARK(BM_GeodesicTable)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_RigidFit(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<Eigen::Vector3d> src(n), dst(n);
  const RigidPose truth(axis_angle_rotation({1, 2, 3}, 0.7), {0.1, 0.2, 0.3});
  for (std::size_t i = 0; i < n; ++i) {
    src[i] = {u(rng), u(rng), u(rng)};
    dst[i] = truth * src[i];
  }
  for (auto _ : state) benchmark::DoNotOptimize(fit_rigid_transform(src, dst));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RigidFit)->Arg(50)->Arg(500)->Arg(5000);

static void BM_RobustFit(benchmark::State& state) {
  const auto& t = turtle(4);
  const auto synth = observe(t, 500);
  std::vector<int> all(synth.observation.pixel_count());
  std::iota(all.begin(), all.end(), 0);
  const auto pts = unproject_pixels(synth.observation, all);
  // Outlier pixels point at an unrelated vertex.
  std::vector<Eigen::Vector3d> targets;
  const std::size_t m = t.mesh.vertex_count();
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto v = static_cast<std::size_t>(synth.true_vertex[i]);
    targets.push_back(t.mesh.vertices[synth.outlier[i] ? (v + m / 2) % m : v]);
  }
  for (auto _ : state) benchmark::DoNotOptimize(fit_rigid_transform_robust(targets, pts));
}
BENCHMARK(BM_RobustFit)->Unit(benchmark::kMillisecond);

static void BM_LboSpectrum(benchmark::State& state) {
  const auto mesh = shapes::icosphere(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(lbo_spectrum(mesh, 17));
  state.counters["vertices"] = static_cast<double>(mesh.vertex_count());
}
// 642 vertices takes the dense path, 2562 and 10242 the Lanczos path.
BENCHMARK(BM_LboSpectrum)->Arg(3)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

static void BM_SolvePoses(benchmark::State& state) {
  const auto& t = turtle(4);
  const auto synth = observe(t, static_cast<int>(state.range(0)));
  PoseConfig cfg;
  cfg.depth_mode = state.range(1) ? DepthMode::Pairwise : DepthMode::Sensor;
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_poses(synth.observation, t.mesh, t.annotations.embeddings, t.parts, cfg,
                                         t.annotations.embedding_nn_median));
}
BENCHMARK(BM_SolvePoses)->Args({500, 0})->Args({2000, 0})->Args({500, 1})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
