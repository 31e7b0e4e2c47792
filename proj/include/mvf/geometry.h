#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace mvf {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Rigid motion q -> R*q + t with R a proper rotation (R^T R = I, det = +1).
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }
  static RigidTransform from_axis_angle(const Vec3& axis, double angle_rad,
                                        const Vec3& translation = Vec3::Zero());

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 apply_vector(const Vec3& v) const { return rotation * v; }

  RigidTransform inverse() const;
  // Composition: result.apply(p) == this->apply(inner.apply(p)).
  RigidTransform compose(const RigidTransform& inner) const;

  bool is_valid(double tol = 1e-9) const;
  double rotation_angle() const;  // radians, in [0, pi]
};

struct Aabb {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void expand(const Vec3& p);
  void expand(const Aabb& box);
  Vec3 center() const { return 0.5 * (min + max); }
  double squared_distance(const Vec3& p) const;
};

// Closest point on triangle (a, b, c) to query point p (Ericson's method).
Vec3 closest_point_on_triangle(const Vec3& a, const Vec3& b, const Vec3& c,
                               const Vec3& p);

// Barycentric coordinates of point p (assumed on the triangle's plane).
Vec3 barycentric_coordinates(const Vec3& a, const Vec3& b, const Vec3& c,
                             const Vec3& p);

// Ray/triangle intersection with inclusive edges. Returns true and fills t
// for hits with t >= 0. Near-parallel rays are rejected.
bool ray_triangle_intersect(const Vec3& origin, const Vec3& dir,
                            const Vec3& a, const Vec3& b, const Vec3& c,
                            double* t);

// Triangle/axis-aligned-box overlap (separating axis test).
bool triangle_box_overlap(const Vec3& box_center, const Vec3& box_half,
                          const Vec3& a, const Vec3& b, const Vec3& c);

}  // namespace mvf
