#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "canonmap/mesh.hpp"

namespace canonmap {

using EmbeddingMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Cotangent stiffness (PSD, off-diagonal -w_ij with w_ij = (cot a + cot b) / 2,
/// zero row sums) and lumped mass (one third of incident triangle area).
struct LaplacianOperators {
  Eigen::SparseMatrix<double> stiffness;
  Eigen::VectorXd mass;
  std::size_t negative_weight_edges = 0;  // diagnostics only
};

/// Throws DegenerateTriangle naming the first zero-area face.
LaplacianOperators cotangent_laplacian(const CanonicalMesh& mesh);

struct LboSpectrum {
  Eigen::VectorXd eigenvalues;      // ascending, units 1/m^2
  Eigen::MatrixXd eigenfunctions;   // m x count, mass-orthonormal, sign-canonical
};

enum class EmbeddingProvenance { Spectral, Imported };

std::string_view to_string(EmbeddingProvenance p);
EmbeddingProvenance provenance_from_string(std::string_view s);

struct VertexEmbeddingTable {
  EmbeddingMatrix rows;  // m x d
  EmbeddingProvenance provenance = EmbeddingProvenance::Spectral;

  std::size_t vertex_count() const { return static_cast<std::size_t>(rows.rows()); }
  int dims() const { return static_cast<int>(rows.cols()); }
};

/// Throws ValidationError (non-finite, d < 2) or DimensionMismatch (row count).
void validate_embedding_table(const VertexEmbeddingTable& table, std::size_t vertex_count);

struct EigenSolverOptions {
  std::size_t dense_limit = 1000;   // dense solver up to this many vertices
  double tolerance = 1e-9;          // relative residual for the iterative path
  std::size_t max_krylov = 2000;
  unsigned long long seed = 0x5eed;
};

/// Smallest `count` eigenpairs of L phi = lambda M phi.
/// Throws EigensolveFailure with iteration diagnostics.
LboSpectrum lbo_spectrum(const CanonicalMesh& mesh, int count, const EigenSolverOptions& options = {});
LboSpectrum lbo_spectrum(const LaplacianOperators& ops, int count, const EigenSolverOptions& options = {});

/// Flips each column so that its largest-magnitude entry is positive
/// (first such entry on exact ties).
void canonicalize_signs(Eigen::MatrixXd& columns);

struct SpectralEmbedding {
  VertexEmbeddingTable table;
  LboSpectrum spectrum;  // d + 1 pairs, constant mode first
};

/// Row i = (phi_1(i) / sqrt(lambda_1), ..., phi_d(i) / sqrt(lambda_d)).
SpectralEmbedding lbo_embeddings(const CanonicalMesh& mesh, int d, const EigenSolverOptions& options = {});

/// Median over vertices of the distance to the nearest other vertex embedding.
double median_nn_distance(const VertexEmbeddingTable& table);

}  // namespace canonmap
