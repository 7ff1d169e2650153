#include "canonmap/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "canonmap/error.hpp"
#include "canonmap/parallel.hpp"

namespace canonmap {

std::string_view to_string(EmbeddingProvenance p) {
  return p == EmbeddingProvenance::Spectral ? "spectral" : "imported";
}

EmbeddingProvenance provenance_from_string(std::string_view s) {
  if (s == "spectral") return EmbeddingProvenance::Spectral;
  if (s == "imported") return EmbeddingProvenance::Imported;
  throw Error(ErrorCode::SchemaError, "unknown embedding provenance '" + std::string(s) + "'");
}

void validate_embedding_table(const VertexEmbeddingTable& table, std::size_t vertex_count) {
  if (table.vertex_count() != vertex_count)
    throw Error(ErrorCode::DimensionMismatch, "embedding table has " + std::to_string(table.vertex_count()) +
                                                  " rows, mesh has " + std::to_string(vertex_count) + " vertices");
  if (table.dims() < 2) throw Error(ErrorCode::ValidationError, "embedding dimension must be at least 2");
  if (!table.rows.allFinite()) throw Error(ErrorCode::ValidationError, "embedding table has non-finite entries");
}

LaplacianOperators cotangent_laplacian(const CanonicalMesh& mesh) {
  const std::size_t m = mesh.vertex_count();
  LaplacianOperators ops;
  ops.mass = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(mesh.face_count() * 12);
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const auto& face = mesh.faces[f];
    const Eigen::Vector3d& p0 = mesh.vertices[face[0]];
    const Eigen::Vector3d& p1 = mesh.vertices[face[1]];
    const Eigen::Vector3d& p2 = mesh.vertices[face[2]];
    const double twice_area = (p1 - p0).cross(p2 - p0).norm();
    const double longest = std::max({(p1 - p0).squaredNorm(), (p2 - p1).squaredNorm(), (p0 - p2).squaredNorm()});
    if (!(twice_area > 1e-14 * longest))
      throw Error(ErrorCode::DegenerateTriangle, "face " + std::to_string(f) + " has zero area");
    for (int c = 0; c < 3; ++c) {
      // Corner c is opposite the edge (a, b).
      const int a = face[(c + 1) % 3];
      const int b = face[(c + 2) % 3];
      const Eigen::Vector3d ea = mesh.vertices[a] - mesh.vertices[face[c]];
      const Eigen::Vector3d eb = mesh.vertices[b] - mesh.vertices[face[c]];
      const double half_cot = 0.5 * ea.dot(eb) / twice_area;
      triplets.emplace_back(a, b, -half_cot);
      triplets.emplace_back(b, a, -half_cot);
      triplets.emplace_back(a, a, half_cot);
      triplets.emplace_back(b, b, half_cot);
      ops.mass(face[c]) += twice_area / 6.0;
    }
  }
  ops.stiffness.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  ops.stiffness.setFromTriplets(triplets.begin(), triplets.end());
  ops.stiffness.makeCompressed();
  for (int k = 0; k < ops.stiffness.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(ops.stiffness, k); it; ++it)
      if (it.row() < it.col() && it.value() > 0.0) ++ops.negative_weight_edges;
  return ops;
}

void canonicalize_signs(Eigen::MatrixXd& columns) {
  for (Eigen::Index k = 0; k < columns.cols(); ++k) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < columns.rows(); ++i) {
      const double a = std::abs(columns(i, k));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (columns(arg, k) < 0.0) columns.col(k) = -columns.col(k);
  }
}

namespace {

LboSpectrum dense_spectrum(const LaplacianOperators& ops, int count) {
  const Eigen::VectorXd inv_sqrt_mass = ops.mass.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd a = Eigen::MatrixXd(ops.stiffness);
  a = inv_sqrt_mass.asDiagonal() * a * inv_sqrt_mass.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  if (eig.info() != Eigen::Success)
    throw Error(ErrorCode::EigensolveFailure, "dense symmetric eigensolver did not converge");
  LboSpectrum out;
  out.eigenvalues = eig.eigenvalues().head(count);
  out.eigenfunctions = inv_sqrt_mass.asDiagonal() * eig.eigenvectors().leftCols(count);
  return out;
}

// Shift-invert Lanczos in the mass inner product with full reorthogonalization.
// The operator (L + sM)^-1 M is self-adjoint under <x, y> = x^T M y and its
// largest eigenvalues 1 / (lambda + s) belong to the smallest lambda.
LboSpectrum lanczos_spectrum(const LaplacianOperators& ops, int count, const EigenSolverOptions& options) {
  const Eigen::Index m = ops.mass.size();
  const Eigen::VectorXd& mass = ops.mass;
  double max_ratio = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) max_ratio = std::max(max_ratio, ops.stiffness.coeff(i, i) / mass(i));
  const double shift = 1e-8 * max_ratio;
  double stiffness_norm = 0.0;  // infinity norm
  {
    Eigen::VectorXd row_abs = Eigen::VectorXd::Zero(m);
    for (Eigen::Index c = 0; c < ops.stiffness.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(ops.stiffness, c); it; ++it) row_abs(it.row()) += std::abs(it.value());
    stiffness_norm = row_abs.maxCoeff();
  }
  const double mass_norm = mass.maxCoeff();

  Eigen::SparseMatrix<double> shifted = ops.stiffness;
  for (Eigen::Index i = 0; i < m; ++i) shifted.coeffRef(i, i) += shift * mass(i);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor(shifted);
  if (factor.info() != Eigen::Success)
    throw Error(ErrorCode::EigensolveFailure, "factorization of shifted stiffness failed");

  auto m_dot = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) { return x.dot(mass.cwiseProduct(y)); };

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_vector = [&] {
    Eigen::VectorXd v(m);
    for (Eigen::Index i = 0; i < m; ++i) v(i) = normal(rng);
    return v;
  };

  std::size_t krylov = std::min<std::size_t>(static_cast<std::size_t>(m),
                                             std::max<std::size_t>(4 * static_cast<std::size_t>(count), count + 40));
  double worst_residual = std::numeric_limits<double>::infinity();
  for (int attempt = 0;; ++attempt) {
    Eigen::MatrixXd basis(m, static_cast<Eigen::Index>(krylov));
    std::vector<double> alpha, beta;
    Eigen::VectorXd q = random_vector();
    q /= std::sqrt(m_dot(q, q));
    std::size_t steps = 0;
    for (std::size_t j = 0; j < krylov; ++j) {
      basis.col(static_cast<Eigen::Index>(j)) = q;
      ++steps;
      Eigen::VectorXd w = factor.solve(mass.cwiseProduct(q));
      alpha.push_back(m_dot(w, q));
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i <= j; ++i) {
          const auto col = basis.col(static_cast<Eigen::Index>(i));
          w -= m_dot(w, col) * col;
        }
      }
      if (j + 1 == krylov) break;
      double b = std::sqrt(std::max(0.0, m_dot(w, w)));
      if (b < 1e-12 * std::abs(alpha.back())) {
        // Invariant subspace: continue with a fresh direction orthogonal to the basis.
        w = random_vector();
        for (int pass = 0; pass < 2; ++pass)
          for (std::size_t i = 0; i <= j; ++i) {
            const auto col = basis.col(static_cast<Eigen::Index>(i));
            w -= m_dot(w, col) * col;
          }
        q = w / std::sqrt(m_dot(w, w));
        beta.push_back(0.0);
      } else {
        q = w / b;
        beta.push_back(b);
      }
    }

    const auto k = static_cast<Eigen::Index>(steps);
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      tri(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < k) tri(i, i + 1) = tri(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(tri);
    // Largest Ritz values of the inverted operator come last.
    LboSpectrum out;
    out.eigenvalues.resize(count);
    out.eigenfunctions.resize(m, count);
    worst_residual = 0.0;
    for (int c = 0; c < count; ++c) {
      const Eigen::Index idx = k - 1 - c;
      const double nu = small.eigenvalues()(idx);
      const double lambda = 1.0 / nu - shift;
      Eigen::VectorXd phi = basis.leftCols(k) * small.eigenvectors().col(idx);
      phi /= std::sqrt(m_dot(phi, phi));
      const Eigen::VectorXd lphi = ops.stiffness * phi;
      const Eigen::VectorXd mphi = mass.cwiseProduct(phi);
      // Normwise backward error; relative to |L phi| alone the constant mode never converges.
      const double scale = (stiffness_norm + std::abs(lambda) * mass_norm) * phi.norm();
      worst_residual = std::max(worst_residual, (lphi - lambda * mphi).norm() / scale);
      out.eigenvalues(c) = lambda;
      out.eigenfunctions.col(c) = phi;
    }
    if (worst_residual <= options.tolerance) return out;
    if (krylov >= static_cast<std::size_t>(m) || krylov >= options.max_krylov) {
      std::ostringstream msg;
      msg << "Lanczos did not converge: " << attempt + 1 << " attempts, Krylov dimension " << krylov
          << ", worst relative residual " << worst_residual << " > " << options.tolerance;
      throw Error(ErrorCode::EigensolveFailure, msg.str());
    }
    krylov = std::min({2 * krylov, static_cast<std::size_t>(m), options.max_krylov});
  }
}

}  // namespace

LboSpectrum lbo_spectrum(const LaplacianOperators& ops, int count, const EigenSolverOptions& options) {
  const auto m = static_cast<std::size_t>(ops.mass.size());
  if (count < 1 || static_cast<std::size_t>(count) > m)
    throw Error(ErrorCode::ValidationError, "requested " + std::to_string(count) + " eigenpairs from a " +
                                                std::to_string(m) + "-vertex mesh");
  LboSpectrum spectrum = m <= options.dense_limit ? dense_spectrum(ops, count) : lanczos_spectrum(ops, count, options);
  if (!spectrum.eigenvalues.allFinite() || !spectrum.eigenfunctions.allFinite())
    throw Error(ErrorCode::EigensolveFailure, "eigensolver produced non-finite values");
  // Round-off can push the constant mode slightly below zero.
  for (Eigen::Index i = 0; i < spectrum.eigenvalues.size(); ++i)
    spectrum.eigenvalues(i) = std::max(0.0, spectrum.eigenvalues(i));
  canonicalize_signs(spectrum.eigenfunctions);
  return spectrum;
}

LboSpectrum lbo_spectrum(const CanonicalMesh& mesh, int count, const EigenSolverOptions& options) {
  return lbo_spectrum(cotangent_laplacian(mesh), count, options);
}

SpectralEmbedding lbo_embeddings(const CanonicalMesh& mesh, int d, const EigenSolverOptions& options) {
  if (d < 2) throw Error(ErrorCode::ValidationError, "embedding dimension must be at least 2");
  if (static_cast<std::size_t>(d) + 1 > mesh.vertex_count())
    throw Error(ErrorCode::ValidationError, "embedding dimension " + std::to_string(d) + " needs more than " +
                                                std::to_string(mesh.vertex_count()) + " vertices");
  SpectralEmbedding out;
  out.spectrum = lbo_spectrum(mesh, d + 1, options);
  const Eigen::VectorXd& lambda = out.spectrum.eigenvalues;
  if (!(lambda(1) > 0.0))
    throw Error(ErrorCode::EigensolveFailure, "first nontrivial eigenvalue is zero (disconnected mesh?)");
  out.table.provenance = EmbeddingProvenance::Spectral;
  out.table.rows.resize(static_cast<Eigen::Index>(mesh.vertex_count()), d);
  for (int k = 1; k <= d; ++k)
    out.table.rows.col(k - 1) = out.spectrum.eigenfunctions.col(k) / std::sqrt(lambda(k));
  return out;
}

double median_nn_distance(const VertexEmbeddingTable& table) {
  const Eigen::Index m = table.rows.rows();
  if (m < 2) throw Error(ErrorCode::ValidationError, "nearest-neighbor distance needs at least 2 rows");
  std::vector<double> nn(static_cast<std::size_t>(m));
  parallel_for(static_cast<std::size_t>(m), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double best = std::numeric_limits<double>::infinity();
      const auto ri = table.rows.row(static_cast<Eigen::Index>(i));
      for (Eigen::Index j = 0; j < m; ++j) {
        if (j == static_cast<Eigen::Index>(i)) continue;
        best = std::min(best, (table.rows.row(j) - ri).squaredNorm());
      }
      nn[i] = std::sqrt(best);
    }
  });
  const std::size_t mid = nn.size() / 2;
  std::nth_element(nn.begin(), nn.begin() + static_cast<std::ptrdiff_t>(mid), nn.end());
  if (nn.size() % 2 == 1) return nn[mid];
  const double upper = nn[mid];
  const double lower = *std::max_element(nn.begin(), nn.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace canonmap
