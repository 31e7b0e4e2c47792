#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "mvf/geometry.h"

namespace mvf {

struct OrientedPointCloud {
  std::vector<Vec3> positions;
  std::vector<Vec3> normals;  // empty, or one unit normal per position

  size_t size() const { return positions.size(); }
  bool has_normals() const { return !normals.empty(); }
};

struct SurfacePoint {
  Vec3 point;
  double distance = 0.0;
  int triangle = -1;
  Vec3 normal = Vec3::UnitZ();
};

struct RayHit {
  double t = 0.0;
  Vec3 point;
  Vec3 normal;  // face normal, not oriented toward the ray
  int triangle = -1;
};

// Indexed triangle mesh with a BVH over triangles. Immutable after
// construction; all queries are const and safe to run concurrently.
class TriangleMesh {
 public:
  // Throws ValidationError on out-of-range indices or triangles with
  // area < 1e-12 (degenerate normals would poison downstream queries).
  TriangleMesh(std::vector<Vec3> vertices,
               std::vector<std::array<int, 3>> triangles,
               std::vector<Vec3> vertex_normals = {});

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<Vec3>& vertex_normals() const { return vertex_normals_; }
  bool has_vertex_normals() const { return !vertex_normals_.empty(); }

  size_t triangle_count() const { return triangles_.size(); }
  const Vec3& face_normal(int t) const { return face_normals_[t]; }
  double face_area(int t) const { return face_areas_[t]; }
  double total_area() const { return total_area_; }
  Aabb bounds() const { return bounds_; }

  // Exact nearest point on the surface. Ties between equidistant triangles
  // resolve to the lowest triangle index, matching a linear scan. The
  // returned normal interpolates vertex normals when present, and is the
  // face normal otherwise. Throws on an empty mesh.
  SurfacePoint nearest_surface_point(const Vec3& query) const;

  // Nearest intersection with t >= 0, or nullopt on a miss. Edge hits are
  // inclusive; equal-t hits resolve to the lowest triangle index.
  std::optional<RayHit> ray_intersect(const Vec3& origin,
                                      const Vec3& direction) const;

  // All intersection parameters along the ray, unsorted. Used for
  // parity-based occupancy tests.
  void ray_all_hits(const Vec3& origin, const Vec3& direction,
                    std::vector<double>* ts) const;

  // Area-uniform surface sampling; deterministic for a fixed seed. Each
  // sample carries the face normal of its source triangle. Throws when
  // n < 1 or the mesh has zero area.
  OrientedPointCloud sample_surface(int n, uint64_t seed) const;

  // Positional transform; normals are rotated. Connectivity is shared.
  TriangleMesh transformed(const RigidTransform& t) const;

  // Area-weighted vertex normals (computed, ignores stored ones).
  std::vector<Vec3> computed_vertex_normals() const;

 private:
  struct BvhNode {
    Aabb box;
    int left = -1;    // internal: child node indices
    int right = -1;
    int first = 0;    // leaf: range into triangle_order_
    int count = 0;
  };

  void build_bvh();
  int build_bvh_node(int first, int count, std::vector<Vec3>& centroids);

  std::vector<Vec3> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<Vec3> vertex_normals_;
  std::vector<Vec3> face_normals_;
  std::vector<double> face_areas_;
  double total_area_ = 0.0;
  Aabb bounds_;

  std::vector<BvhNode> nodes_;
  std::vector<int> triangle_order_;
};

}  // namespace mvf
