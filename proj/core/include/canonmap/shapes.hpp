#pragma once

#include <string>
#include <vector>

#include "canonmap/mesh.hpp"

namespace canonmap::shapes {

CanonicalMesh icosahedron(double radius = 1.0);

/// Loop-style midpoint subdivision of the icosahedron, projected onto the
/// sphere: 10 * 4^s + 2 vertices, 20 * 4^s faces, outward winding.
CanonicalMesh icosphere(int subdivisions, double radius = 1.0);

/// Flat (nx+1) x (ny+1) vertex grid over [0, sx] x [0, sy] in the z = 0 plane.
CanonicalMesh grid(int nx, int ny, double sx = 1.0, double sy = 1.0);

/// Closed box centered at the origin with the given full extents.
CanonicalMesh box(double ex, double ey, double ez);

/// Plush-turtle stand-in: a flattened shell with head, tail and four limbs of
/// deliberately unequal size, so it has no mirror symmetry. Canonical frame is
/// x forward, y left, z up, meters; the lowest point sits at z = 0.
CanonicalMesh turtle(int subdivisions = 3);

struct PartAnchor {
  std::string name;
  Eigen::Vector3d direction;  // from the shell center, turtle frame
  double threshold_m;
};

/// The six parts used in the grasping experiments: belly, back, left hand,
/// right hand, left foot, right foot.
std::vector<PartAnchor> turtle_part_anchors();

/// Vertex whose direction from the bounding-box center best matches `direction`.
int anchor_vertex(const CanonicalMesh& mesh, const Eigen::Vector3d& direction);

}  // namespace canonmap::shapes
