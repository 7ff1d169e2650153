#pragma once

#include <cstdint>
#include <vector>

#include "canonmap/correspondence.hpp"
#include "canonmap/error.hpp"
#include "canonmap/observation.hpp"

namespace canonmap {

struct DepthSolverOptions {
  double initial_depth_m = 1.0;
  double min_depth_m = 0.05;
  int max_iterations = 100;
  double relative_tolerance = 1e-10;
  std::size_t all_pairs_limit = 200;  // all pairs up to this many pixels
  std::size_t pairs_per_pixel = 20;   // random pairs beyond it
  std::uint64_t seed = 11;
  bool reflected_restart = true;
  bool linear_start = true;  // extra run from the linear ray-constraint solution
};

struct DepthEstimate {
  std::vector<double> depths;  // aligned with FilteredCorrespondences::kept_pixels
  int iterations = 0;
  double cost = 0.0;           // 0.5 * sum of squared distance residuals, m^2
  std::size_t pair_count = 0;
  bool converged = false;
};

/// Thrown for degenerate geometry; carries the best iterate reached.
class DepthSolveFailure : public Error {
 public:
  DepthSolveFailure(const std::string& message, DepthEstimate best)
      : Error(ErrorCode::ConvergenceFailure, message), best_(std::move(best)) {}
  const DepthEstimate& best() const { return best_; }

 private:
  DepthEstimate best_;
};

/// Recovers per-pixel depths without a depth sensor by making distances
/// between back-projected pixels match distances between their target
/// vertices. Levenberg-Marquardt on
///   sum_(i,j) (|d_i r_i - d_j r_j| - |v_i - v_j|)^2,  d_i >= min_depth,
/// started at a constant depth, then restarted from the depth profile mirrored
/// about its median to escape the near/far flip. With `linear_start` a third
/// run starts from the least-squares solution of r_i x (A v_i + b) = 0 with
/// A relaxed to a general 3x3 matrix. The lowest-cost run wins.
/// Throws InsufficientPixels (< 4 pixels) or DepthSolveFailure (rays coincide,
/// or no run converged within max_iterations).
DepthEstimate estimate_depths_pairwise(const Observation& obs, const FilteredCorrespondences& corr,
                                       const DepthSolverOptions& options = {});

}  // namespace canonmap
