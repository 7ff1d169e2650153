#include "canonmap/depth_free.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SVD>
#include <Eigen/SparseCore>

namespace canonmap {
namespace {

struct PairProblem {
  std::vector<Eigen::Vector3d> rays;
  std::vector<std::pair<int, int>> pairs;
  std::vector<double> target_dist;
};

double evaluate_cost(const PairProblem& p, const std::vector<double>& d) {
  double cost = 0.0;
  for (std::size_t k = 0; k < p.pairs.size(); ++k) {
    const auto [i, j] = p.pairs[k];
    const double r = (d[i] * p.rays[i] - d[j] * p.rays[j]).norm() - p.target_dist[k];
    cost += r * r;
  }
  return 0.5 * cost;
}

// Solves (J^T J + mu diag(J^T J)) step = -J^T r.
Eigen::VectorXd damped_step(const PairProblem& p, const std::vector<double>& d, double mu) {
  const auto n = static_cast<Eigen::Index>(d.size());
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(p.pairs.size() * 4);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  for (std::size_t k = 0; k < p.pairs.size(); ++k) {
    const auto [i, j] = p.pairs[k];
    const Eigen::Vector3d diff = d[i] * p.rays[i] - d[j] * p.rays[j];
    const double len = diff.norm();
    if (len == 0.0) continue;
    const double r = len - p.target_dist[k];
    const double ji = diff.dot(p.rays[i]) / len;
    const double jj = -diff.dot(p.rays[j]) / len;
    grad(i) += ji * r;
    grad(j) += jj * r;
    trip.emplace_back(i, j, ji * jj);
    trip.emplace_back(j, i, ji * jj);
    diag(i) += ji * ji;
    diag(j) += jj * jj;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double base = std::max(diag(i), 1e-12);
    trip.emplace_back(i, i, diag(i) + mu * base);
  }
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());
  if (n <= 400) {
    const Eigen::LDLT<Eigen::MatrixXd> ldlt{Eigen::MatrixXd(a)};
    return ldlt.solve(-grad);
  }
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(1e-12);
  cg.setMaxIterations(static_cast<Eigen::Index>(10 * n));
  cg.compute(a);
  return cg.solve(-grad);
}

DepthEstimate run_lm(const PairProblem& p, std::vector<double> d, const DepthSolverOptions& opt) {
  DepthEstimate est;
  est.pair_count = p.pairs.size();
  double cost = evaluate_cost(p, d);
  double mu = 1e-3;
  for (int it = 0; it < opt.max_iterations; ++it) {
    est.iterations = it + 1;
    if (cost == 0.0) {
      est.converged = true;
      break;
    }
    bool accepted = false;
    for (int tries = 0; tries < 30 && !accepted; ++tries) {
      const Eigen::VectorXd step = damped_step(p, d, mu);
      std::vector<double> trial = d;
      for (std::size_t i = 0; i < trial.size(); ++i)
        trial[i] = std::max(opt.min_depth_m, trial[i] + step(static_cast<Eigen::Index>(i)));
      const double trial_cost = evaluate_cost(p, trial);
      if (std::isfinite(trial_cost) && trial_cost <= cost) {
        const double rel = (cost - trial_cost) / cost;
        d = std::move(trial);
        cost = trial_cost;
        mu = std::max(mu / 3.0, 1e-12);
        accepted = true;
        if (rel < opt.relative_tolerance) est.converged = true;
      } else {
        mu *= 4.0;
      }
    }
    if (!accepted) {
      // No descent direction left at any damping: stationary point.
      est.converged = true;
      break;
    }
    if (est.converged) break;
  }
  est.depths = std::move(d);
  est.cost = cost;
  return est;
}

// Depths from the homogeneous system r_i x (A v_i + b) = 0 (two rows per
// pixel, 12 unknowns), with the scale fixed by A's singular values and the
// sign by requiring points in front of the camera. Empty if the system has no
// usable solution.
std::vector<double> linear_start_depths(const PairProblem& p, const std::vector<Eigen::Vector3d>& targets,
                                        double min_depth) {
  const std::size_t n = targets.size();
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& v : targets) centroid += v;
  centroid /= static_cast<double>(n);
  double spread = 0.0;
  for (const auto& v : targets) spread += (v - centroid).norm();
  spread /= static_cast<double>(n);
  if (spread == 0.0) return {};

  Eigen::MatrixXd sys(static_cast<Eigen::Index>(2 * n), 12);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d x = (targets[i] - centroid) / spread;
    const Eigen::Vector3d& r = p.rays[i];  // (u, v, 1)
    // Rows of [r]_x picking the y- and x-components of r x q with q = A x + b.
    const Eigen::Vector3d row0(0.0, -r.z(), r.y());
    const Eigen::Vector3d row1(r.z(), 0.0, -r.x());
    for (int k = 0; k < 2; ++k) {
      const Eigen::Vector3d& w = k == 0 ? row0 : row1;
      auto out = sys.row(static_cast<Eigen::Index>(2 * i + static_cast<std::size_t>(k)));
      for (int a = 0; a < 3; ++a) {
        out.segment<3>(3 * a) = w(a) * x.transpose();
        out(9 + a) = w(a);
      }
    }
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys, Eigen::ComputeThinV);
  const Eigen::VectorXd h = svd.matrixV().col(11);
  Eigen::Matrix3d a;
  for (int r = 0; r < 3; ++r) a.row(r) = h.segment<3>(3 * r).transpose();
  const Eigen::Vector3d b = h.tail<3>();
  const double k = Eigen::JacobiSVD<Eigen::Matrix3d>(a).singularValues().mean();
  if (!(k > 0.0)) return {};

  std::vector<double> depths(n);
  double sign_votes = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    depths[i] = (a * ((targets[i] - centroid) / spread) + b).z() * spread / k;
    sign_votes += depths[i];
  }
  const double sign = sign_votes < 0.0 ? -1.0 : 1.0;
  for (double& d : depths) d = std::max(min_depth, sign * d);
  return depths;
}

}  // namespace

DepthEstimate estimate_depths_pairwise(const Observation& obs, const FilteredCorrespondences& corr,
                                       const DepthSolverOptions& options) {
  const std::size_t n = corr.size();
  if (n < 4)
    throw Error(ErrorCode::InsufficientPixels,
                "depth-free estimation needs at least 4 pixels, got " + std::to_string(n));
  PairProblem problem;
  problem.rays.reserve(n);
  for (int px : corr.kept_pixels)
    problem.rays.push_back(pixel_ray(obs.intrinsics, obs.pixels[static_cast<std::size_t>(px)]));

  const DepthEstimate initial{std::vector<double>(n, options.initial_depth_m), 0, 0.0, 0, false};
  double max_angle = 0.0;  // sine of the widest ray separation
  const Eigen::Vector3d r0 = problem.rays.front().normalized();
  for (const auto& r : problem.rays) max_angle = std::max(max_angle, r0.cross(r.normalized()).norm());
  if (max_angle < 1e-9)
    throw DepthSolveFailure("all pixel rays coincide; pairwise depth problem is rank deficient", initial);

  if (n <= options.all_pairs_limit) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) problem.pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
  } else {
    std::mt19937_64 rng(options.seed);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(n) - 1);
    const std::size_t count = options.pairs_per_pixel * n;
    while (problem.pairs.size() < count) {
      const int i = pick(rng);
      const int j = pick(rng);
      if (i != j) problem.pairs.emplace_back(std::min(i, j), std::max(i, j));
    }
  }
  problem.target_dist.reserve(problem.pairs.size());
  for (const auto& [i, j] : problem.pairs)
    problem.target_dist.push_back(
        (corr.targets[static_cast<std::size_t>(i)] - corr.targets[static_cast<std::size_t>(j)]).norm());

  DepthEstimate best = run_lm(problem, initial.depths, options);
  if (options.reflected_restart) {
    std::vector<double> sorted = best.depths;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n / 2), sorted.end());
    const double pivot = sorted[n / 2];
    std::vector<double> mirrored(n);
    for (std::size_t i = 0; i < n; ++i) mirrored[i] = std::max(options.min_depth_m, 2.0 * pivot - best.depths[i]);
    DepthEstimate alt = run_lm(problem, std::move(mirrored), options);
    if (alt.cost < best.cost) {
      alt.iterations += best.iterations;
      best = std::move(alt);
    } else {
      best.iterations += alt.iterations;
    }
  }
  if (options.linear_start) {
    std::vector<double> start = linear_start_depths(problem, corr.targets, options.min_depth_m);
    if (!start.empty()) {
      DepthEstimate alt = run_lm(problem, std::move(start), options);
      if (alt.cost < best.cost) {
        alt.iterations += best.iterations;
        best = std::move(alt);
      } else {
        best.iterations += alt.iterations;
      }
    }
  }
  for (double d : best.depths)
    if (!std::isfinite(d)) throw DepthSolveFailure("depth solver diverged", initial);
  if (!best.converged)
    throw DepthSolveFailure("pairwise depth solver did not converge in " + std::to_string(options.max_iterations) +
                                " iterations (cost " + std::to_string(best.cost) + ")",
                            best);
  return best;
}

}  // namespace canonmap
