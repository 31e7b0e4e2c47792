#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "mvf/kdtree.h"
#include "mvf/maps.h"
#include "mvf/mesh.h"

namespace mvf {

// A shape operand for the surface metrics: either a triangle mesh
// (nearest queries hit the exact surface, samples are drawn area-
// uniformly) or an oriented point cloud (nearest queries and "samples"
// use the points themselves).
class SurfaceShape {
 public:
  explicit SurfaceShape(const TriangleMesh& mesh);
  explicit SurfaceShape(const OrientedPointCloud& cloud);

  bool is_mesh() const { return mesh_ != nullptr; }
  bool has_normals() const;
  bool empty() const;

  // Sample points (and their normals) representing this shape.
  OrientedPointCloud sample(int samples, uint64_t seed) const;

  struct Nearest {
    double distance;
    Vec3 normal;
  };
  Nearest nearest(const Vec3& query) const;

 private:
  const TriangleMesh* mesh_ = nullptr;
  const OrientedPointCloud* cloud_ = nullptr;
  std::unique_ptr<KdTree3> tree_;
};

struct MetricParams {
  int samples = 10000;
  uint64_t seed = 0;
};

// Symmetric mean nearest-surface distance between two shapes (half the
// sum of the two directional means). The directional variant averages
// recon-sample distances to ref only.
double chamfer(const SurfaceShape& recon, const SurfaceShape& ref,
               const MetricParams& params = {});
double chamfer_directional(const SurfaceShape& recon, const SurfaceShape& ref,
                           const MetricParams& params = {});

// Directional: max over recon samples of the nearest-ref distance.
double hausdorff(const SurfaceShape& recon, const SurfaceShape& ref,
                 const MetricParams& params = {});

// Mean angle (degrees) between recon sample normals and the normal at the
// nearest ref surface point. Both shapes must carry normals.
double normal_distance(const SurfaceShape& recon, const SurfaceShape& ref,
                       const MetricParams& params = {});

// Mean absolute depth difference over pixels foreground in both sets,
// per view, averaged across views with a non-empty intersection.
double depth_map_error(const MapSet& a, const MapSet& b);

struct VoxelGrid {
  int resolution = 128;
  // Fixed bounds [-1, 1]^3 match the unit-sphere shape normalization.
  std::vector<uint8_t> occupancy;  // resolution^3, x fastest

  size_t index(int x, int y, int z) const {
    return (size_t(z) * resolution + y) * resolution + x;
  }
  size_t count_occupied() const;
};

enum class VoxelizeMode {
  kSolid,    // parity of surface crossings, voted over 3 axis rays
  kSurface,  // voxels whose cell intersects any triangle
};

// Solid mode requires a watertight mesh: when the three axis votes
// disagree on more than 0.5% of voxels the mesh is reported as
// non-watertight with a suggestion to use surface mode.
VoxelGrid voxelize(const TriangleMesh& mesh, int resolution = 128,
                   VoxelizeMode mode = VoxelizeMode::kSolid);

// 1 - |intersection| / |union|; two empty grids count as identical (0).
double volumetric_jaccard(const VoxelGrid& a, const VoxelGrid& b);

}  // namespace mvf
