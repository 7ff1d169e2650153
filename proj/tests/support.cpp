#include "support.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "canonmap/shapes.hpp"

namespace testing_support {

const PartDefinition& TurtleFixture::part(const std::string& name) const {
  for (const auto& p : parts)
    if (p.name == name) return p;
  throw std::out_of_range(name);
}

const TurtleFixture& turtle() {
  static const TurtleFixture fixture = [] {
    TurtleFixture f;
    f.mesh = shapes::turtle(4);
    f.graph = build_edge_graph(f.mesh);
    f.annotations = annotate_mesh(f.mesh);
    for (const auto& a : shapes::turtle_part_anchors())
      f.parts.push_back(grow_part(f.mesh, f.graph, shapes::anchor_vertex(f.mesh, a.direction), a.threshold_m, a.name));
    return f;
  }();
  return fixture;
}

CanonicalMesh random_mesh(std::mt19937_64& rng, int nx, int ny) {
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  std::uniform_real_distribution<double> height(-0.2, 0.2);
  std::bernoulli_distribution coin(0.5);
  CanonicalMesh mesh;
  const double h = 0.01;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const bool border = i == 0 || j == 0 || i == nx || j == ny;
      const double dx = border ? 0.0 : jitter(rng), dy = border ? 0.0 : jitter(rng);
      mesh.vertices.emplace_back((i + dx) * h, (j + dy) * h, height(rng) * h);
    }
  auto id = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      if (coin(rng)) {
        mesh.faces.push_back({a, b, c});
        mesh.faces.push_back({a, c, d});
      } else {
        mesh.faces.push_back({a, b, d});
        mesh.faces.push_back({b, c, d});
      }
    }
  return mesh;
}

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

namespace oracle {

std::vector<std::vector<double>> floyd_warshall(const EdgeGraph& graph) {
  const std::size_t m = graph.vertex_count();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> d(m, std::vector<double>(m, inf));
  for (std::size_t i = 0; i < m; ++i) {
    d[i][i] = 0.0;
    for (const auto& nb : graph.adjacency[i]) d[i][static_cast<std::size_t>(nb.vertex)] = nb.length;
  }
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

std::vector<std::pair<double, int>> sorted_distances(const EmbeddingMatrix& table, const Eigen::RowVectorXd& query) {
  std::vector<std::pair<double, int>> all;
  for (Eigen::Index v = 0; v < table.rows(); ++v) all.emplace_back((table.row(v) - query).norm(), static_cast<int>(v));
  std::sort(all.begin(), all.end());
  return all;
}

std::vector<Eigen::Vector3d> aggregate(const CanonicalMesh& mesh, const MatchCandidates& cand, double theta0,
                                       double theta1, const std::vector<int>* restrict_to, std::vector<int>& kept) {
  std::vector<Eigen::Vector3d> out;
  kept.clear();
  for (Eigen::Index i = 0; i < cand.indices.rows(); ++i) {
    std::vector<double> row(cand.distances.row(i).data(), cand.distances.row(i).data() + cand.distances.cols());
    std::sort(row.begin(), row.end());
    const std::size_t k = row.size();
    const double med = k % 2 ? row[k / 2] : 0.5 * (row[k / 2 - 1] + row[k / 2]);
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    int count = 0;
    for (Eigen::Index j = 0; j < cand.indices.cols(); ++j) {
      const double dist = cand.distances(i, j);
      const int v = cand.indices(i, j);
      const bool m0 = dist < theta0, m1 = dist - med < theta1;
      const bool member =
          !restrict_to || std::find(restrict_to->begin(), restrict_to->end(), v) != restrict_to->end();
      if (m0 && m1 && member) {
        sum += mesh.vertices[static_cast<std::size_t>(v)];
        ++count;
      }
    }
    if (count > 0) {
      kept.push_back(static_cast<int>(i));
      out.push_back(sum / count);
    }
  }
  return out;
}

}  // namespace oracle
}  // namespace testing_support
