#include "mvf/geometry.h"

#include <cmath>

namespace mvf {

RigidTransform RigidTransform::from_axis_angle(const Vec3& axis,
                                               double angle_rad,
                                               const Vec3& translation) {
  RigidTransform t;
  if (axis.norm() > 0 && angle_rad != 0.0) {
    t.rotation = Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix();
  }
  t.translation = translation;
  return t;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

RigidTransform RigidTransform::compose(const RigidTransform& inner) const {
  RigidTransform out;
  out.rotation = rotation * inner.rotation;
  out.translation = rotation * inner.translation + translation;
  return out;
}

bool RigidTransform::is_valid(double tol) const {
  if (!rotation.allFinite() || !translation.allFinite()) return false;
  Mat3 err = rotation.transpose() * rotation - Mat3::Identity();
  if (err.cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(rotation.determinant() - 1.0) <= tol;
}

double RigidTransform::rotation_angle() const {
  double c = 0.5 * (rotation.trace() - 1.0);
  c = std::min(1.0, std::max(-1.0, c));
  return std::acos(c);
}

void Aabb::expand(const Vec3& p) {
  min = min.cwiseMin(p);
  max = max.cwiseMax(p);
}

void Aabb::expand(const Aabb& box) {
  min = min.cwiseMin(box.min);
  max = max.cwiseMax(box.max);
}

double Aabb::squared_distance(const Vec3& p) const {
  double d2 = 0.0;
  for (int k = 0; k < 3; ++k) {
    double d = 0.0;
    if (p[k] < min[k]) d = min[k] - p[k];
    else if (p[k] > max[k]) d = p[k] - max[k];
    d2 += d * d;
  }
  return d2;
}

Vec3 closest_point_on_triangle(const Vec3& a, const Vec3& b, const Vec3& c,
                               const Vec3& p) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;

  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return a + v * ab;
  }

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return a + w * ac;
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return b + w * (c - b);
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  return a + ab * v + ac * w;
}

Vec3 barycentric_coordinates(const Vec3& a, const Vec3& b, const Vec3& c,
                             const Vec3& p) {
  const Vec3 v0 = b - a, v1 = c - a, v2 = p - a;
  const double d00 = v0.dot(v0);
  const double d01 = v0.dot(v1);
  const double d11 = v1.dot(v1);
  const double d20 = v2.dot(v0);
  const double d21 = v2.dot(v1);
  const double denom = d00 * d11 - d01 * d01;
  if (denom <= 0.0) return Vec3(1.0, 0.0, 0.0);
  const double v = (d11 * d20 - d01 * d21) / denom;
  const double w = (d00 * d21 - d01 * d20) / denom;
  return Vec3(1.0 - v - w, v, w);
}

bool ray_triangle_intersect(const Vec3& origin, const Vec3& dir,
                            const Vec3& a, const Vec3& b, const Vec3& c,
                            double* t) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 pvec = dir.cross(e2);
  const double det = e1.dot(pvec);
  // Relative parallelism guard; triangles are non-degenerate by construction.
  const double eps = 1e-14 * e1.cross(e2).norm();
  if (std::abs(det) <= eps) return false;

  const double inv_det = 1.0 / det;
  const Vec3 tvec = origin - a;
  const double u = tvec.dot(pvec) * inv_det;
  if (u < 0.0 || u > 1.0) return false;

  const Vec3 qvec = tvec.cross(e1);
  const double v = dir.dot(qvec) * inv_det;
  if (v < 0.0 || u + v > 1.0) return false;

  const double hit_t = e2.dot(qvec) * inv_det;
  if (hit_t < 0.0) return false;
  *t = hit_t;
  return true;
}

namespace {

inline bool axis_test(const Vec3& axis, const Vec3& v0, const Vec3& v1,
                      const Vec3& v2, const Vec3& half) {
  const double p0 = axis.dot(v0);
  const double p1 = axis.dot(v1);
  const double p2 = axis.dot(v2);
  const double r = half[0] * std::abs(axis[0]) + half[1] * std::abs(axis[1]) +
                   half[2] * std::abs(axis[2]);
  const double mn = std::min(p0, std::min(p1, p2));
  const double mx = std::max(p0, std::max(p1, p2));
  return mn <= r && mx >= -r;
}

}  // namespace

bool triangle_box_overlap(const Vec3& box_center, const Vec3& box_half,
                          const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 v0 = a - box_center;
  const Vec3 v1 = b - box_center;
  const Vec3 v2 = c - box_center;

  // Box face normals.
  for (int k = 0; k < 3; ++k) {
    const double mn = std::min(v0[k], std::min(v1[k], v2[k]));
    const double mx = std::max(v0[k], std::max(v1[k], v2[k]));
    if (mn > box_half[k] || mx < -box_half[k]) return false;
  }

  // Triangle normal.
  const Vec3 e0 = v1 - v0;
  const Vec3 e1 = v2 - v1;
  const Vec3 e2 = v0 - v2;
  if (!axis_test(e0.cross(e1), v0, v1, v2, box_half)) return false;

  // Nine edge cross products.
  const Vec3 axes[3] = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  for (const Vec3& ax : axes) {
    if (!axis_test(ax.cross(e0), v0, v1, v2, box_half)) return false;
    if (!axis_test(ax.cross(e1), v0, v1, v2, box_half)) return false;
    if (!axis_test(ax.cross(e2), v0, v1, v2, box_half)) return false;
  }
  return true;
}

}  // namespace mvf
