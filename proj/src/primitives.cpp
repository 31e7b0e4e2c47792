#include "mvf/primitives.h"

#include <cmath>
#include <map>

namespace mvf {

namespace {

struct IcosphereBuilder {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::map<std::pair<int, int>, int> midpoint_cache;

  int midpoint(int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = midpoint_cache.find(key);
    if (it != midpoint_cache.end()) return it->second;
    const Vec3 m = (vertices[a] + vertices[b]).normalized();
    vertices.push_back(m);
    const int idx = int(vertices.size()) - 1;
    midpoint_cache.emplace(key, idx);
    return idx;
  }
};

}  // namespace

TriangleMesh make_icosphere(double radius, int subdivisions) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  IcosphereBuilder b;
  const double raw[12][3] = {
      {-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
  for (const auto& v : raw) b.vertices.push_back(Vec3(v[0], v[1], v[2]).normalized());
  b.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                 {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                 {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                 {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  for (int s = 0; s < subdivisions; ++s) {
    std::vector<std::array<int, 3>> next;
    next.reserve(b.triangles.size() * 4);
    for (const auto& tri : b.triangles) {
      const int ab = b.midpoint(tri[0], tri[1]);
      const int bc = b.midpoint(tri[1], tri[2]);
      const int ca = b.midpoint(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    b.triangles = std::move(next);
  }

  std::vector<Vec3> normals = b.vertices;  // unit sphere: normal == position
  for (Vec3& v : b.vertices) v *= radius;
  return TriangleMesh(std::move(b.vertices), std::move(b.triangles),
                      std::move(normals));
}

TriangleMesh make_box(const Vec3& h) {
  std::vector<Vec3> v = {{-h[0], -h[1], -h[2]}, {h[0], -h[1], -h[2]},
                         {h[0], h[1], -h[2]},   {-h[0], h[1], -h[2]},
                         {-h[0], -h[1], h[2]},  {h[0], -h[1], h[2]},
                         {h[0], h[1], h[2]},    {-h[0], h[1], h[2]}};
  // Outward-facing CCW faces.
  std::vector<std::array<int, 3>> t = {
      {0, 2, 1}, {0, 3, 2},  // z-
      {4, 5, 6}, {4, 6, 7},  // z+
      {0, 1, 5}, {0, 5, 4},  // y-
      {3, 6, 2}, {3, 7, 6},  // y+
      {0, 4, 7}, {0, 7, 3},  // x-
      {1, 2, 6}, {1, 6, 5},  // x+
  };
  return TriangleMesh(std::move(v), std::move(t));
}

TriangleMesh make_torus(double major_radius, double minor_radius,
                        int major_segments, int minor_segments) {
  std::vector<Vec3> vertices;
  std::vector<Vec3> normals;
  vertices.reserve(size_t(major_segments) * minor_segments);
  const double two_pi = 2.0 * M_PI;
  for (int i = 0; i < major_segments; ++i) {
    const double u = two_pi * i / major_segments;
    const Vec3 ring_center(major_radius * std::cos(u), 0.0,
                           major_radius * std::sin(u));
    const Vec3 radial(std::cos(u), 0.0, std::sin(u));
    for (int j = 0; j < minor_segments; ++j) {
      const double v = two_pi * j / minor_segments;
      const Vec3 n = std::cos(v) * radial + std::sin(v) * Vec3::UnitY();
      vertices.push_back(ring_center + minor_radius * n);
      normals.push_back(n);
    }
  }
  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(size_t(major_segments) * minor_segments * 2);
  for (int i = 0; i < major_segments; ++i) {
    const int i1 = (i + 1) % major_segments;
    for (int j = 0; j < minor_segments; ++j) {
      const int j1 = (j + 1) % minor_segments;
      const int a = i * minor_segments + j;
      const int bidx = i1 * minor_segments + j;
      const int c = i1 * minor_segments + j1;
      const int d = i * minor_segments + j1;
      triangles.push_back({a, bidx, c});
      triangles.push_back({a, c, d});
    }
  }
  return TriangleMesh(std::move(vertices), std::move(triangles),
                      std::move(normals));
}

TriangleMesh make_blob(double max_radius, int subdivisions) {
  TriangleMesh sphere = make_icosphere(1.0, subdivisions);
  std::vector<Vec3> verts = sphere.vertices();
  double max_norm = 0.0;
  for (Vec3& v : verts) {
    const Vec3 d = v;  // unit direction
    const double bump = 1.0 + 0.18 * std::sin(3.1 * d[0] + 0.9) *
                                  std::cos(2.3 * d[1] - 0.4) +
                        0.12 * std::sin(2.7 * d[2] + 1.7) +
                        0.07 * std::cos(4.1 * d[0] * d[1] + 0.3);
    v = d * bump;
    max_norm = std::max(max_norm, v.norm());
  }
  const double scale = max_radius / max_norm;
  for (Vec3& v : verts) v *= scale;
  return TriangleMesh(std::move(verts), sphere.triangles());
}

}  // namespace mvf
