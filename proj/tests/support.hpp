#pragma once

#include <random>
#include <span>
#include <vector>

#include "canonmap/annotations.hpp"
#include "canonmap/correspondence.hpp"
#include "canonmap/geodesic.hpp"
#include "canonmap/mesh.hpp"
#include "canonmap/parts.hpp"

namespace testing_support {

using namespace canonmap;

// Turtle (subdivision 4) with annotations and the six parts, built once per process.
struct TurtleFixture {
  CanonicalMesh mesh;
  EdgeGraph graph;
  Annotations annotations;
  std::vector<PartDefinition> parts;

  const VertexEmbeddingTable& table() const { return annotations.embeddings; }
  double nn() const { return annotations.embedding_nn_median; }
  const PartDefinition& part(const std::string& name) const;
};

const TurtleFixture& turtle();

// Jittered grid with random diagonals, optionally with random faces removed
// while staying connected. Vertex count (nx+1)(ny+1).
CanonicalMesh random_mesh(std::mt19937_64& rng, int nx, int ny);

Eigen::Matrix3d random_rotation(std::mt19937_64& rng);

namespace oracle {

// All-pairs shortest paths by Floyd-Warshall over the same edge graph.
std::vector<std::vector<double>> floyd_warshall(const EdgeGraph& graph);

// Every vertex sorted by (distance, index) for one query embedding.
std::vector<std::pair<double, int>> sorted_distances(const EmbeddingMatrix& table, const Eigen::RowVectorXd& query);

// Target aggregation recomputed straight from the mask definition.
std::vector<Eigen::Vector3d> aggregate(const CanonicalMesh& mesh, const MatchCandidates& cand, double theta0,
                                       double theta1, const std::vector<int>* restrict_to, std::vector<int>& kept);

}  // namespace oracle
}  // namespace testing_support
