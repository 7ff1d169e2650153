#include "canonmap/shapes.hpp"

#include <cmath>
#include <map>
#include <utility>

namespace canonmap::shapes {
namespace {

void orient_outward(CanonicalMesh& mesh, const Eigen::Vector3d& center) {
  for (auto& f : mesh.faces) {
    const Eigen::Vector3d& a = mesh.vertices[f[0]];
    const Eigen::Vector3d& b = mesh.vertices[f[1]];
    const Eigen::Vector3d& c = mesh.vertices[f[2]];
    const Eigen::Vector3d n = (b - a).cross(c - a);
    if (n.dot((a + b + c) / 3.0 - center) < 0) std::swap(f[1], f[2]);
  }
}

}  // namespace

CanonicalMesh icosahedron(double radius) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  CanonicalMesh mesh;
  mesh.vertices = {{-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
                   {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
                   {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : mesh.vertices) v = v.normalized() * radius;
  mesh.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  orient_outward(mesh, Eigen::Vector3d::Zero());
  return mesh;
}

CanonicalMesh icosphere(int subdivisions, double radius) {
  CanonicalMesh mesh = icosahedron(1.0);
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
      const int idx = static_cast<int>(mesh.vertices.size());
      mesh.vertices.push_back((mesh.vertices[a] + mesh.vertices[b]).normalized());
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<Face> next;
    next.reserve(mesh.faces.size() * 4);
    for (const auto& f : mesh.faces) {
      const int ab = mid(f[0], f[1]);
      const int bc = mid(f[1], f[2]);
      const int ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    mesh.faces = std::move(next);
  }
  for (auto& v : mesh.vertices) v *= radius;
  return mesh;
}

CanonicalMesh grid(int nx, int ny, double sx, double sy) {
  CanonicalMesh mesh;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.vertices.emplace_back(sx * i / nx, sy * j / ny, 0.0);
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      mesh.faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      mesh.faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return mesh;
}

CanonicalMesh box(double ex, double ey, double ez) {
  CanonicalMesh mesh;
  for (int k = 0; k < 8; ++k)
    mesh.vertices.emplace_back((k & 1 ? 0.5 : -0.5) * ex, (k & 2 ? 0.5 : -0.5) * ey,
                               (k & 4 ? 0.5 : -0.5) * ez);
  mesh.faces = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
                {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  orient_outward(mesh, Eigen::Vector3d::Zero());
  return mesh;
}

namespace {

struct Bump {
  Eigen::Vector3d direction;
  double amplitude;
  double width;
};

const std::vector<Bump>& turtle_bumps() {
  static const std::vector<Bump> bumps = {
      {Eigen::Vector3d(1.0, 0.0, 0.15).normalized(), 0.045, 0.06},     // head
      {Eigen::Vector3d(0.45, 0.85, -0.1).normalized(), 0.040, 0.05},   // left hand
      {Eigen::Vector3d(0.45, -0.85, -0.1).normalized(), 0.030, 0.05},  // right hand
      {Eigen::Vector3d(-0.6, 0.75, -0.15).normalized(), 0.028, 0.04},  // left foot
      {Eigen::Vector3d(-0.6, -0.75, -0.15).normalized(), 0.020, 0.04}, // right foot
      {Eigen::Vector3d(-1.0, 0.1, 0.0).normalized(), 0.018, 0.03},     // tail
  };
  return bumps;
}

}  // namespace

CanonicalMesh turtle(int subdivisions) {
  CanonicalMesh mesh = icosphere(subdivisions, 1.0);
  for (auto& v : mesh.vertices) {
    const Eigen::Vector3d u = v.normalized();
    const double z_scale = u.z() >= 0.0 ? 0.045 : 0.022;
    Eigen::Vector3d p(0.11 * u.x(), 0.085 * u.y(), z_scale * u.z());
    double bump = 0.0;
    for (const auto& b : turtle_bumps()) bump += b.amplitude * std::exp(-(1.0 - u.dot(b.direction)) / b.width);
    // Low-frequency shell ripple, off-axis so that no mirror plane survives.
    bump += 0.004 * std::sin(3.0 * std::atan2(u.y(), u.x()) + 0.7) * std::max(0.0, u.z());
    v = p + bump * u;
  }
  double min_z = mesh.vertices.front().z();
  for (const auto& v : mesh.vertices) min_z = std::min(min_z, v.z());
  for (auto& v : mesh.vertices) v.z() -= min_z;
  return mesh;
}

std::vector<PartAnchor> turtle_part_anchors() {
  const auto& b = turtle_bumps();
  return {
      {"belly", Eigen::Vector3d(0.0, 0.0, -1.0), 0.045},
      {"back", Eigen::Vector3d(0.0, 0.0, 1.0), 0.045},
      {"left hand", b[1].direction, 0.03},
      {"right hand", b[2].direction, 0.03},
      {"left foot", b[3].direction, 0.025},
      {"right foot", b[4].direction, 0.025},
  };
}

int anchor_vertex(const CanonicalMesh& mesh, const Eigen::Vector3d& direction) {
  const Eigen::Vector3d center = bounding_box(mesh).center();
  const Eigen::Vector3d d = direction.normalized();
  int best = 0;
  double best_score = -2.0;
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
    const Eigen::Vector3d r = mesh.vertices[i] - center;
    const double n = r.norm();
    if (n == 0.0) continue;
    const double score = r.dot(d) / n;
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace canonmap::shapes
