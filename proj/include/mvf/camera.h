#pragma once

#include <filesystem>
#include <vector>

#include "mvf/geometry.h"

namespace mvf {

// Orthographic view. The pose maps camera frame to object frame
// (q = R * s + e). Depth is the camera-frame z coordinate, increasing
// toward the camera, so objects inside the unit view sphere project to
// depths in [-1, 1]. kappa is the object-space spacing of adjacent pixel
// centers. Continuous pixel coordinate i is the center of column i.
struct OrthographicCamera {
  RigidTransform pose;
  double kappa = 0.0;
  int width = 0;
  int height = 0;

  Vec3 view_direction() const { return -pose.rotation.col(2); }
  Vec3 view_axis() const { return pose.rotation.col(2); }  // +z, toward camera

  // Camera-frame coordinates of a (sub)pixel at depth d.
  Vec3 camera_point(double px, double py, double d) const {
    return Vec3(kappa * (px + 0.5 - 0.5 * width),
                kappa * (py + 0.5 - 0.5 * height), d);
  }

  Vec3 unproject(double px, double py, double d) const {
    return pose.apply(camera_point(px, py, d));
  }

  struct Projection {
    double px, py, d;
  };

  // Exact inverse of unproject.
  Projection project(const Vec3& q) const {
    const Vec3 s = pose.rotation.transpose() * (q - pose.translation);
    return {s[0] / kappa - 0.5 + 0.5 * width,
            s[1] / kappa - 0.5 + 0.5 * height, s[2]};
  }

  bool pixel_in_bounds(int px, int py) const {
    return px >= 0 && px < width && py >= 0 && py < height;
  }
};

struct ViewRig {
  std::vector<OrthographicCamera> cameras;
  Vec3 up_axis = Vec3::UnitY();

  int view_count() const { return int(cameras.size()); }
  double kappa() const { return cameras.empty() ? 0.0 : cameras[0].kappa; }
  int width() const { return cameras.empty() ? 0 : cameras[0].width; }
  int height() const { return cameras.empty() ? 0 : cameras[0].height; }
};

// The standard 12-view rig: cameras at the vertices of a regular
// icosahedron of circumradius 1 (golden-ratio construction, vertices in
// lexicographic order), each looking at the origin with image up aligned
// to +y. All poses have zero translation so depth is centered on the
// object. kappa = 2 / min(width, height).
ViewRig icosahedron_rig(int width, int height);

// JSON manifest: {width, height, kappa, cameras: [{rotation: 9 row-major,
// translation: 3}]}. Numbers round-trip exactly.
ViewRig read_rig_json(const std::filesystem::path& path);
void write_rig_json(const std::filesystem::path& path, const ViewRig& rig);

}  // namespace mvf
