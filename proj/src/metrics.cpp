#include "mvf/metrics.h"

#include <algorithm>
#include <cmath>

#include "mvf/errors.h"
#include "mvf/parallel.h"

namespace mvf {

SurfaceShape::SurfaceShape(const TriangleMesh& mesh) : mesh_(&mesh) {}

SurfaceShape::SurfaceShape(const OrientedPointCloud& cloud) : cloud_(&cloud) {
  tree_ = std::make_unique<KdTree3>(cloud.positions);
}

bool SurfaceShape::has_normals() const {
  return is_mesh() ? true : cloud_->has_normals();
}

bool SurfaceShape::empty() const {
  return is_mesh() ? mesh_->triangle_count() == 0 : cloud_->positions.empty();
}

OrientedPointCloud SurfaceShape::sample(int samples, uint64_t seed) const {
  if (is_mesh()) return mesh_->sample_surface(samples, seed);
  return *cloud_;  // a point cloud is its own sampling
}

SurfaceShape::Nearest SurfaceShape::nearest(const Vec3& query) const {
  if (is_mesh()) {
    const SurfacePoint sp = mesh_->nearest_surface_point(query);
    return {sp.distance, sp.normal};
  }
  const auto r = tree_->nearest(query);
  const Vec3 n = cloud_->has_normals() ? cloud_->normals[r.index] : Vec3::UnitZ();
  return {std::sqrt(r.squared_distance), n};
}

namespace {

void check_non_empty(const SurfaceShape& a, const SurfaceShape& b) {
  if (a.empty() || b.empty()) {
    throw ValidationError("surface metrics require non-empty shapes");
  }
}

// Per-sample nearest distances, computed in parallel but reduced in
// index order so results do not depend on the thread count.
std::vector<double> nearest_distances(const OrientedPointCloud& samples,
                                      const SurfaceShape& target) {
  std::vector<double> d(samples.size());
  parallel_for(0, int64_t(samples.size()), [&](int64_t i) {
    d[i] = target.nearest(samples.positions[i]).distance;
  });
  return d;
}

double mean(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return values.empty() ? 0.0 : sum / double(values.size());
}

}  // namespace

double chamfer_directional(const SurfaceShape& recon, const SurfaceShape& ref,
                           const MetricParams& params) {
  check_non_empty(recon, ref);
  const OrientedPointCloud samples = recon.sample(params.samples, params.seed);
  return mean(nearest_distances(samples, ref));
}

double chamfer(const SurfaceShape& recon, const SurfaceShape& ref,
               const MetricParams& params) {
  MetricParams reverse = params;
  reverse.seed = params.seed + 1;  // independent draw for the other shape
  return 0.5 * (chamfer_directional(recon, ref, params) +
                chamfer_directional(ref, recon, reverse));
}

double hausdorff(const SurfaceShape& recon, const SurfaceShape& ref,
                 const MetricParams& params) {
  check_non_empty(recon, ref);
  const OrientedPointCloud samples = recon.sample(params.samples, params.seed);
  const std::vector<double> d = nearest_distances(samples, ref);
  double worst = 0.0;
  for (double v : d) worst = std::max(worst, v);
  return worst;
}

double normal_distance(const SurfaceShape& recon, const SurfaceShape& ref,
                       const MetricParams& params) {
  check_non_empty(recon, ref);
  if (!recon.has_normals() || !ref.has_normals()) {
    throw ValidationError("normal_distance requires normals on both shapes");
  }
  const OrientedPointCloud samples = recon.sample(params.samples, params.seed);
  if (!samples.has_normals()) {
    throw ValidationError("normal_distance requires normals on both shapes");
  }
  std::vector<double> angles(samples.size());
  parallel_for(0, int64_t(samples.size()), [&](int64_t i) {
    const Vec3 n_ref = ref.nearest(samples.positions[i]).normal;
    const double c =
        std::clamp(samples.normals[i].normalized().dot(n_ref.normalized()),
                   -1.0, 1.0);
    angles[i] = std::acos(c) * 180.0 / M_PI;
  });
  return mean(angles);
}

double depth_map_error(const MapSet& a, const MapSet& b) {
  if (a.view_count() != b.view_count() || a.rig.width() != b.rig.width() ||
      a.rig.height() != b.rig.height() ||
      a.rig.kappa() != b.rig.kappa()) {
    throw ValidationError("depth_map_error requires matching rigs");
  }

  double view_sum = 0.0;
  int views_with_overlap = 0;
  for (int v = 0; v < a.view_count(); ++v) {
    const ViewMaps& va = a.views[v];
    const ViewMaps& vb = b.views[v];
    double sum = 0.0;
    int64_t count = 0;
    for (int y = 0; y < va.mask.height(); ++y) {
      for (int x = 0; x < va.mask.width(); ++x) {
        if (!va.mask.at(x, y) || !vb.mask.at(x, y)) continue;
        sum += std::abs(double(va.depth.at(x, y)) - double(vb.depth.at(x, y)));
        ++count;
      }
    }
    if (count > 0) {
      view_sum += sum / double(count);
      ++views_with_overlap;
    }
  }
  return views_with_overlap == 0 ? 0.0 : view_sum / double(views_with_overlap);
}

size_t VoxelGrid::count_occupied() const {
  size_t n = 0;
  for (uint8_t v : occupancy) n += (v != 0);
  return n;
}

namespace {

// Deterministic tiny lateral offset for parity rays, so lines never run
// exactly through shared triangle edges of grid-aligned geometry.
double line_jitter(uint64_t key) {
  uint64_t z = key + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  // In (-0.5e-6, 0.5e-6), never exactly zero.
  return ((double(z) + 0.5) * (1.0 / 18446744073709551616.0) - 0.5) * 1e-6;
}

}  // namespace

VoxelGrid voxelize(const TriangleMesh& mesh, int resolution,
                   VoxelizeMode mode) {
  if (resolution < 2) throw ValidationError("voxel resolution must be >= 2");
  VoxelGrid grid;
  grid.resolution = resolution;
  grid.occupancy.assign(size_t(resolution) * resolution * resolution, 0);

  const double cell = 2.0 / resolution;
  const auto center = [&](int i) { return -1.0 + (i + 0.5) * cell; };

  if (mode == VoxelizeMode::kSurface) {
    const Vec3 half = Vec3::Constant(0.5 * cell);
    for (size_t t = 0; t < mesh.triangle_count(); ++t) {
      const auto& tri = mesh.triangles()[t];
      const Vec3& a = mesh.vertices()[tri[0]];
      const Vec3& b = mesh.vertices()[tri[1]];
      const Vec3& c = mesh.vertices()[tri[2]];
      Aabb box;
      box.expand(a);
      box.expand(b);
      box.expand(c);
      const auto to_cell = [&](double v) {
        return std::clamp(int(std::floor((v + 1.0) / cell)), 0, resolution - 1);
      };
      for (int z = to_cell(box.min[2]); z <= to_cell(box.max[2]); ++z) {
        for (int y = to_cell(box.min[1]); y <= to_cell(box.max[1]); ++y) {
          for (int x = to_cell(box.min[0]); x <= to_cell(box.max[0]); ++x) {
            if (grid.occupancy[grid.index(x, y, z)]) continue;
            const Vec3 cc(center(x), center(y), center(z));
            if (triangle_box_overlap(cc, half, a, b, c)) {
              grid.occupancy[grid.index(x, y, z)] = 1;
            }
          }
        }
      }
    }
    return grid;
  }

  // Solid mode: per axis, cast one line through each row of voxel
  // centers and classify centers by crossing parity; vote across axes.
  std::vector<uint8_t> votes(grid.occupancy.size(), 0);
  for (int axis = 0; axis < 3; ++axis) {
    const int a1 = (axis + 1) % 3;
    const int a2 = (axis + 2) % 3;
    parallel_for(0, int64_t(resolution) * resolution, [&](int64_t task) {
      const int i1 = int(task / resolution);
      const int i2 = int(task % resolution);
      Vec3 origin;
      origin[axis] = -2.0;
      origin[a1] = center(i1) + line_jitter(uint64_t(task) * 3 + axis);
      origin[a2] = center(i2) + line_jitter(uint64_t(task) * 3 + axis + 7777);
      Vec3 dir = Vec3::Zero();
      dir[axis] = 1.0;

      std::vector<double> hits;
      mesh.ray_all_hits(origin, dir, &hits);
      std::sort(hits.begin(), hits.end());

      for (int k = 0; k < resolution; ++k) {
        const double t_center = center(k) - origin[axis];
        const size_t crossings =
            std::lower_bound(hits.begin(), hits.end(), t_center) - hits.begin();
        if (crossings % 2 == 1) {
          int idx[3];
          idx[axis] = k;
          idx[a1] = i1;
          idx[a2] = i2;
          votes[grid.index(idx[0], idx[1], idx[2])] |= uint8_t(1 << axis);
        }
      }
    });
  }

  size_t disagreements = 0;
  for (size_t i = 0; i < votes.size(); ++i) {
    const int n = (votes[i] & 1) + ((votes[i] >> 1) & 1) + ((votes[i] >> 2) & 1);
    if (n != 0 && n != 3) ++disagreements;
    grid.occupancy[i] = n >= 2 ? 1 : 0;
  }
  if (double(disagreements) > 0.005 * double(votes.size())) {
    throw ValidationError(
        "mesh appears non-watertight (axis parity votes disagree on " +
        std::to_string(disagreements) +
        " voxels); use surface-only voxelization");
  }
  return grid;
}

double volumetric_jaccard(const VoxelGrid& a, const VoxelGrid& b) {
  if (a.resolution != b.resolution) {
    throw ValidationError("voxel grids have different resolutions");
  }
  size_t intersection = 0, uni = 0;
  for (size_t i = 0; i < a.occupancy.size(); ++i) {
    const bool oa = a.occupancy[i] != 0;
    const bool ob = b.occupancy[i] != 0;
    intersection += (oa && ob);
    uni += (oa || ob);
  }
  if (uni == 0) return 0.0;  // identical emptiness
  return 1.0 - double(intersection) / double(uni);
}

}  // namespace mvf
