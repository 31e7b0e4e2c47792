#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "mvf/maps.h"
#include "mvf/mesh.h"

namespace mvf {

struct RenderOptions {
  // Interpolate vertex normals instead of using face normals. Flat
  // geometry renders exactly with face normals; curved test meshes can
  // opt into smooth shading.
  bool smooth_normals = false;
};

// Ground-truth MapSet by casting one orthographic ray through every pixel
// center. Nearest hit becomes foreground with the hit's camera-frame depth
// and its normal rotated into the camera frame (flipped toward the camera
// when needed). Misses are background. Requires all mesh vertices inside
// the unit view sphere so depths stay in [-1, 1]. Bitwise deterministic
// for any thread count.
MapSet render_mapset(const TriangleMesh& mesh, const ViewRig& rig,
                     const RenderOptions& options = {});

// Controlled corruption of a MapSet for closed-loop fusion tests. All
// magnitudes are bounds/scales, zero disables the component:
//  - depth_bias:       constant shift added to every foreground depth
//  - view_bias:        per-view constant shift drawn from U(-b, +b)
//  - depth_noise:      per-pixel Gaussian depth noise stddev
//  - jitter_*:         per-view rigid pose jitter (angle drawn from
//                      U(0, deg), translation norm from U(0, units)),
//                      composed onto the view's camera pose
//  - normal_noise:     per-pixel random normal rotation stddev (radians)
// Depths are clamped to [-1, 1] after shifting; masks are unchanged.
// Deterministic for a fixed seed; a zero spec returns a bitwise copy.
struct PerturbationSpec {
  double depth_bias = 0.0;
  double view_bias = 0.0;
  double depth_noise = 0.0;
  double jitter_rotation_deg = 0.0;
  double jitter_translation = 0.0;
  double normal_noise = 0.0;
  uint64_t seed = 0;
};

MapSet perturb_mapset(const MapSet& m, const PerturbationSpec& spec);

// Ordered outer boundary of the largest 8-connected foreground component,
// as pixel-edge midpoints in continuous pixel coordinates (integer i is
// the center of column i). Counterclockwise, closed (last point connects
// back to the first). Throws on an empty mask.
std::vector<Eigen::Vector2d> extract_silhouette_contour(
    const ForegroundMask& mask);

}  // namespace mvf
