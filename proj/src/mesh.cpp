#include "mvf/mesh.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "mvf/errors.h"

namespace mvf {

namespace {
constexpr double kDegenerateArea = 1e-12;
constexpr int kLeafSize = 4;
}  // namespace

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices,
                           std::vector<std::array<int, 3>> triangles,
                           std::vector<Vec3> vertex_normals)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      vertex_normals_(std::move(vertex_normals)) {
  const int nv = static_cast<int>(vertices_.size());
  if (!vertex_normals_.empty() && vertex_normals_.size() != vertices_.size()) {
    throw ValidationError("vertex normal count does not match vertex count");
  }
  for (const Vec3& v : vertices_) {
    if (!v.allFinite()) throw ValidationError("non-finite vertex coordinate");
  }

  face_normals_.resize(triangles_.size());
  face_areas_.resize(triangles_.size());
  for (size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (int k = 0; k < 3; ++k) {
      if (tri[k] < 0 || tri[k] >= nv) {
        throw ValidationError("triangle " + std::to_string(t) +
                              " references vertex out of range");
      }
    }
    const Vec3 cross = (vertices_[tri[1]] - vertices_[tri[0]])
                           .cross(vertices_[tri[2]] - vertices_[tri[0]]);
    const double area = 0.5 * cross.norm();
    if (area < kDegenerateArea) {
      throw ValidationError("triangle " + std::to_string(t) +
                            " is degenerate (area < 1e-12)");
    }
    face_normals_[t] = cross / (2.0 * area);
    face_areas_[t] = area;
    total_area_ += area;
    bounds_.expand(vertices_[tri[0]]);
    bounds_.expand(vertices_[tri[1]]);
    bounds_.expand(vertices_[tri[2]]);
  }

  build_bvh();
}

void TriangleMesh::build_bvh() {
  triangle_order_.resize(triangles_.size());
  for (size_t i = 0; i < triangle_order_.size(); ++i) triangle_order_[i] = int(i);
  if (triangles_.empty()) return;

  std::vector<Vec3> centroids(triangles_.size());
  for (size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    centroids[t] =
        (vertices_[tri[0]] + vertices_[tri[1]] + vertices_[tri[2]]) / 3.0;
  }
  nodes_.reserve(2 * triangles_.size());
  build_bvh_node(0, static_cast<int>(triangles_.size()), centroids);
}

int TriangleMesh::build_bvh_node(int first, int count,
                                 std::vector<Vec3>& centroids) {
  const int node_index = static_cast<int>(nodes_.size());
  nodes_.emplace_back();

  Aabb box;
  for (int i = first; i < first + count; ++i) {
    const auto& tri = triangles_[triangle_order_[i]];
    box.expand(vertices_[tri[0]]);
    box.expand(vertices_[tri[1]]);
    box.expand(vertices_[tri[2]]);
  }
  nodes_[node_index].box = box;

  if (count <= kLeafSize) {
    nodes_[node_index].first = first;
    nodes_[node_index].count = count;
    return node_index;
  }

  // Median split on the centroid of the longest box axis. Ties in the
  // comparator fall back to triangle index so the tree is deterministic.
  const Vec3 extent = box.max - box.min;
  int axis = 0;
  if (extent[1] > extent[0]) axis = 1;
  if (extent[2] > extent[axis]) axis = 2;

  auto begin = triangle_order_.begin() + first;
  auto mid = begin + count / 2;
  auto end = begin + count;
  std::nth_element(begin, mid, end, [&](int a, int b) {
    if (centroids[a][axis] != centroids[b][axis])
      return centroids[a][axis] < centroids[b][axis];
    return a < b;
  });

  const int half = count / 2;
  const int left = build_bvh_node(first, half, centroids);
  const int right = build_bvh_node(first + half, count - half, centroids);
  nodes_[node_index].left = left;
  nodes_[node_index].right = right;
  nodes_[node_index].count = 0;
  return node_index;
}

SurfacePoint TriangleMesh::nearest_surface_point(const Vec3& query) const {
  if (triangles_.empty()) {
    throw ValidationError("nearest_surface_point on empty mesh");
  }

  double best_d2 = std::numeric_limits<double>::infinity();
  int best_tri = -1;
  Vec3 best_point = Vec3::Zero();

  // Stack traversal, nearer child first. Nodes are pruned only when their
  // box is strictly farther than the current best, so equidistant
  // candidates are still visited and the index tie-break stays exact.
  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const BvhNode& node = nodes_[stack[--top]];
    if (node.box.squared_distance(query) > best_d2) continue;
    if (node.count > 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const int t = triangle_order_[i];
        const auto& tri = triangles_[t];
        const Vec3 cp = closest_point_on_triangle(
            vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]], query);
        const double d2 = (query - cp).squaredNorm();
        if (d2 < best_d2 || (d2 == best_d2 && t < best_tri)) {
          best_d2 = d2;
          best_tri = t;
          best_point = cp;
        }
      }
    } else {
      const double dl = nodes_[node.left].box.squared_distance(query);
      const double dr = nodes_[node.right].box.squared_distance(query);
      if (dl <= dr) {
        stack[top++] = node.right;
        stack[top++] = node.left;
      } else {
        stack[top++] = node.left;
        stack[top++] = node.right;
      }
    }
  }

  SurfacePoint result;
  result.point = best_point;
  result.distance = std::sqrt(best_d2);
  result.triangle = best_tri;
  if (has_vertex_normals()) {
    const auto& tri = triangles_[best_tri];
    const Vec3 bary = barycentric_coordinates(
        vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]], best_point);
    Vec3 n = bary[0] * vertex_normals_[tri[0]] +
             bary[1] * vertex_normals_[tri[1]] +
             bary[2] * vertex_normals_[tri[2]];
    const double len = n.norm();
    result.normal = len > 0 ? Vec3(n / len) : face_normals_[best_tri];
  } else {
    result.normal = face_normals_[best_tri];
  }
  return result;
}

std::optional<RayHit> TriangleMesh::ray_intersect(const Vec3& origin,
                                                  const Vec3& direction) const {
  if (triangles_.empty()) return std::nullopt;

  double best_t = std::numeric_limits<double>::infinity();
  int best_tri = -1;

  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const BvhNode& node = nodes_[stack[--top]];
    // Slab test against the node box.
    double tmin = 0.0, tmax = best_t;
    bool miss = false;
    for (int k = 0; k < 3 && !miss; ++k) {
      if (direction[k] == 0.0) {
        if (origin[k] < node.box.min[k] || origin[k] > node.box.max[k]) miss = true;
      } else {
        double inv = 1.0 / direction[k];
        double t0 = (node.box.min[k] - origin[k]) * inv;
        double t1 = (node.box.max[k] - origin[k]) * inv;
        if (t0 > t1) std::swap(t0, t1);
        tmin = std::max(tmin, t0);
        tmax = std::min(tmax, t1);
        if (tmin > tmax) miss = true;
      }
    }
    if (miss) continue;

    if (node.count > 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const int t = triangle_order_[i];
        const auto& tri = triangles_[t];
        double hit_t;
        if (ray_triangle_intersect(origin, direction, vertices_[tri[0]],
                                   vertices_[tri[1]], vertices_[tri[2]],
                                   &hit_t)) {
          if (hit_t < best_t || (hit_t == best_t && t < best_tri)) {
            best_t = hit_t;
            best_tri = t;
          }
        }
      }
    } else {
      stack[top++] = node.right;
      stack[top++] = node.left;
    }
  }

  if (best_tri < 0) return std::nullopt;
  RayHit hit;
  hit.t = best_t;
  hit.point = origin + best_t * direction;
  hit.normal = face_normals_[best_tri];
  hit.triangle = best_tri;
  return hit;
}

void TriangleMesh::ray_all_hits(const Vec3& origin, const Vec3& direction,
                                std::vector<double>* ts) const {
  ts->clear();
  if (triangles_.empty()) return;

  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const BvhNode& node = nodes_[stack[--top]];
    double tmin = 0.0, tmax = std::numeric_limits<double>::infinity();
    bool miss = false;
    for (int k = 0; k < 3 && !miss; ++k) {
      if (direction[k] == 0.0) {
        if (origin[k] < node.box.min[k] || origin[k] > node.box.max[k]) miss = true;
      } else {
        double inv = 1.0 / direction[k];
        double t0 = (node.box.min[k] - origin[k]) * inv;
        double t1 = (node.box.max[k] - origin[k]) * inv;
        if (t0 > t1) std::swap(t0, t1);
        tmin = std::max(tmin, t0);
        tmax = std::min(tmax, t1);
        if (tmin > tmax) miss = true;
      }
    }
    if (miss) continue;

    if (node.count > 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const int t = triangle_order_[i];
        const auto& tri = triangles_[t];
        double hit_t;
        if (ray_triangle_intersect(origin, direction, vertices_[tri[0]],
                                   vertices_[tri[1]], vertices_[tri[2]],
                                   &hit_t)) {
          ts->push_back(hit_t);
        }
      }
    } else {
      stack[top++] = node.right;
      stack[top++] = node.left;
    }
  }
}

OrientedPointCloud TriangleMesh::sample_surface(int n, uint64_t seed) const {
  if (n < 1) throw ValidationError("sample_surface requires n >= 1");
  if (triangles_.empty() || total_area_ <= 0.0) {
    throw ValidationError("sample_surface on zero-area mesh");
  }

  std::vector<double> cumulative(triangles_.size());
  double acc = 0.0;
  for (size_t t = 0; t < triangles_.size(); ++t) {
    acc += face_areas_[t];
    cumulative[t] = acc;
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  OrientedPointCloud cloud;
  cloud.positions.resize(n);
  cloud.normals.resize(n);
  for (int i = 0; i < n; ++i) {
    const double pick = uniform(rng) * acc;
    const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), pick);
    const int t = static_cast<int>(
        std::min<size_t>(it - cumulative.begin(), triangles_.size() - 1));
    const auto& tri = triangles_[t];
    // Uniform barycentric draw via the square-root trick.
    const double r1 = std::sqrt(uniform(rng));
    const double r2 = uniform(rng);
    const double u = 1.0 - r1;
    const double v = r1 * (1.0 - r2);
    const double w = r1 * r2;
    cloud.positions[i] = u * vertices_[tri[0]] + v * vertices_[tri[1]] +
                         w * vertices_[tri[2]];
    cloud.normals[i] = face_normals_[t];
  }
  return cloud;
}

TriangleMesh TriangleMesh::transformed(const RigidTransform& t) const {
  std::vector<Vec3> verts(vertices_.size());
  for (size_t i = 0; i < vertices_.size(); ++i) verts[i] = t.apply(vertices_[i]);
  std::vector<Vec3> normals(vertex_normals_.size());
  for (size_t i = 0; i < vertex_normals_.size(); ++i) {
    normals[i] = t.apply_vector(vertex_normals_[i]);
  }
  return TriangleMesh(std::move(verts), triangles_, std::move(normals));
}

std::vector<Vec3> TriangleMesh::computed_vertex_normals() const {
  std::vector<Vec3> normals(vertices_.size(), Vec3::Zero());
  for (size_t t = 0; t < triangles_.size(); ++t) {
    const Vec3 weighted = face_normals_[t] * face_areas_[t];
    for (int k = 0; k < 3; ++k) normals[triangles_[t][k]] += weighted;
  }
  for (Vec3& n : normals) {
    const double len = n.norm();
    if (len > 0) n /= len;
  }
  return normals;
}

}  // namespace mvf
