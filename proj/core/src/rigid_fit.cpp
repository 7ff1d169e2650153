#include "canonmap/rigid_fit.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/SVD>

#include "canonmap/error.hpp"

namespace canonmap {

double alignment_rms(const RigidPose& transform, double scale, std::span<const Eigen::Vector3d> source,
                     std::span<const Eigen::Vector3d> target) {
  double sum = 0.0;
  for (std::size_t i = 0; i < source.size(); ++i)
    sum += (target[i] - (scale * (transform.rotation() * source[i]) + transform.translation())).squaredNorm();
  return source.empty() ? 0.0 : std::sqrt(sum / static_cast<double>(source.size()));
}

RigidFit fit_rigid_transform(std::span<const Eigen::Vector3d> source, std::span<const Eigen::Vector3d> target,
                             bool with_scale) {
  if (source.size() != target.size())
    throw Error(ErrorCode::DimensionMismatch, "point sets differ in size (" + std::to_string(source.size()) +
                                                  " vs " + std::to_string(target.size()) + ")");
  if (source.size() < 3) throw Error(ErrorCode::InsufficientPixels, "rigid fit needs at least 3 point pairs");
  const auto n = static_cast<double>(source.size());
  Eigen::Vector3d cs = Eigen::Vector3d::Zero();
  Eigen::Vector3d ct = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    cs += source[i];
    ct += target[i];
  }
  cs /= n;
  ct /= n;
  Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();
  double source_var = 0.0;
  for (std::size_t i = 0; i < source.size(); ++i) {
    const Eigen::Vector3d s = source[i] - cs;
    cross += (target[i] - ct) * s.transpose();
    source_var += s.squaredNorm();
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(1) < 1e-9 * sv(0))
    throw Error(ErrorCode::DegenerateConfiguration, "point sets are collinear or coincident");
  Eigen::Vector3d d(1.0, 1.0, 1.0);
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(2) = -1.0;
  const Eigen::Matrix3d rotation = svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
  RigidFit fit;
  if (with_scale) fit.scale = sv.dot(d) / source_var;
  fit.transform = RigidPose(rotation, ct - fit.scale * (rotation * cs));
  fit.rms = alignment_rms(fit.transform, fit.scale, source, target);
  return fit;
}

namespace {

std::vector<int> inliers_of(const RigidFit& fit, std::span<const Eigen::Vector3d> source,
                            std::span<const Eigen::Vector3d> target, double threshold) {
  std::vector<int> out;
  const double t2 = threshold * threshold;
  for (std::size_t i = 0; i < source.size(); ++i) {
    const Eigen::Vector3d p = fit.scale * (fit.transform.rotation() * source[i]) + fit.transform.translation();
    if ((target[i] - p).squaredNorm() < t2) out.push_back(static_cast<int>(i));
  }
  return out;
}

RigidFit fit_subset(std::span<const Eigen::Vector3d> source, std::span<const Eigen::Vector3d> target,
                    const std::vector<int>& idx, bool with_scale) {
  std::vector<Eigen::Vector3d> s, t;
  s.reserve(idx.size());
  t.reserve(idx.size());
  for (int i : idx) {
    s.push_back(source[static_cast<std::size_t>(i)]);
    t.push_back(target[static_cast<std::size_t>(i)]);
  }
  return fit_rigid_transform(s, t, with_scale);
}

}  // namespace

RobustFit fit_rigid_transform_robust(std::span<const Eigen::Vector3d> source,
                                     std::span<const Eigen::Vector3d> target, const RobustFitOptions& options,
                                     bool with_scale) {
  RobustFit best;
  best.fit = fit_rigid_transform(source, target, with_scale);
  best.inliers = inliers_of(best.fit, source, target, options.inlier_threshold_m);
  const std::size_t n = source.size();
  if (best.inliers.size() == n) return best;

  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (int it = 0; it < options.iterations; ++it) {
    const std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    std::size_t c = pick(rng);
    if (a == b || b == c || a == c) continue;
    const std::vector<int> sample = {static_cast<int>(a), static_cast<int>(b), static_cast<int>(c)};
    RigidFit candidate;
    try {
      candidate = fit_subset(source, target, sample, with_scale);
    } catch (const Error&) {
      continue;  // degenerate minimal sample
    }
    auto inl = inliers_of(candidate, source, target, options.inlier_threshold_m);
    if (inl.size() > best.inliers.size()) {
      best.fit = candidate;
      best.inliers = std::move(inl);
    }
  }
  if (best.inliers.size() < 3) {
    best.fit = fit_rigid_transform(source, target, with_scale);
    best.inliers.resize(n);
    for (std::size_t i = 0; i < n; ++i) best.inliers[i] = static_cast<int>(i);
    return best;
  }
  // Refit on the consensus set until it stops changing.
  for (int round = 0; round < 10; ++round) {
    RigidFit refit;
    try {
      refit = fit_subset(source, target, best.inliers, with_scale);
    } catch (const Error&) {
      break;
    }
    auto inl = inliers_of(refit, source, target, options.inlier_threshold_m);
    best.fit = refit;
    if (inl == best.inliers || inl.size() < 3) break;
    best.inliers = std::move(inl);
  }
  return best;
}

}  // namespace canonmap
