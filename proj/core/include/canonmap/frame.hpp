#pragma once

#include <vector>

#include "canonmap/mesh.hpp"
#include "canonmap/rigid_pose.hpp"

namespace canonmap {

/// Transform taking raw mesh coordinates into the principal-axis frame:
/// origin at the vertex centroid, axes = principal components by descending
/// variance. Each axis points toward positive third moment (skewness); when
/// the skewness vanishes, its largest-magnitude component is made positive.
/// The third axis is flipped if needed to keep the frame right-handed.
/// Throws DegenerateGeometry when the vertex covariance has rank < 3.
RigidPose assign_canonical_frame(const CanonicalMesh& mesh);

struct SymmetryMap {
  int axis = 0;                 // canonical axis normal to the mirror plane
  std::vector<int> partner;     // mirror vertex of each vertex
  std::vector<double> residual; // distance from the mirrored point to its partner (m)

  double max_residual() const;
  double mean_residual() const;
};

/// Mirrors every vertex across the plane through the frame origin normal to
/// canonical axis `axis` (0, 1 or 2) and matches it to the nearest vertex.
SymmetryMap compute_symmetry_map(const CanonicalMesh& mesh, const RigidPose& frame, int axis);

/// Picks the axis with the smallest mean residual.
SymmetryMap compute_best_symmetry_map(const CanonicalMesh& mesh, const RigidPose& frame);

}  // namespace canonmap
