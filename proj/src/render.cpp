#include "mvf/render.h"

#include <cmath>
#include <random>

#include "mvf/errors.h"
#include "mvf/parallel.h"

namespace mvf {

namespace {

uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  // splitmix64 over seed + stream id.
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Vec3 random_unit_vector(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec3 v;
  do {
    v = Vec3(gauss(rng), gauss(rng), gauss(rng));
  } while (v.norm() < 1e-12);
  return v.normalized();
}

}  // namespace

MapSet render_mapset(const TriangleMesh& mesh, const ViewRig& rig,
                     const RenderOptions& options) {
  for (const Vec3& v : mesh.vertices()) {
    if (v.norm() > 1.0 + 1e-12) {
      throw ValidationError(
          "mesh extends outside the unit view sphere; depths would leave "
          "[-1, 1]");
    }
  }

  std::vector<Vec3> smooth_normals;
  if (options.smooth_normals) {
    smooth_normals = mesh.has_vertex_normals() ? mesh.vertex_normals()
                                               : mesh.computed_vertex_normals();
  }

  MapSet m;
  m.rig = rig;
  m.views.resize(rig.view_count());
  const int w = rig.width();
  const int h = rig.height();
  for (auto& vm : m.views) {
    vm.depth = DepthMap(w, h, 0.0f);
    vm.normal = NormalMap(w, h, Eigen::Vector3f(0.0f, 0.0f, 1.0f));
    vm.mask = ForegroundMask(w, h, 0);
  }

  // One task per (view, row); rows write disjoint pixels.
  parallel_for(0, int64_t(rig.view_count()) * h, [&](int64_t task) {
    const int v = int(task / h);
    const int y = int(task % h);
    const OrthographicCamera& cam = rig.cameras[v];
    const Vec3 dir = cam.view_direction();
    ViewMaps& vm = m.views[v];
    for (int x = 0; x < w; ++x) {
      // Start the ray outside the unit sphere on the camera side.
      const Vec3 origin = cam.unproject(double(x), double(y), 2.0);
      const auto hit = mesh.ray_intersect(origin, dir);
      if (!hit) continue;

      Vec3 n_obj = hit->normal;
      if (options.smooth_normals) {
        const auto& tri = mesh.triangles()[hit->triangle];
        const Vec3 bary = barycentric_coordinates(
            mesh.vertices()[tri[0]], mesh.vertices()[tri[1]],
            mesh.vertices()[tri[2]], hit->point);
        n_obj = bary[0] * smooth_normals[tri[0]] +
                bary[1] * smooth_normals[tri[1]] +
                bary[2] * smooth_normals[tri[2]];
        const double len = n_obj.norm();
        n_obj = len > 0 ? Vec3(n_obj / len) : hit->normal;
      }

      const Vec3 s = cam.pose.rotation.transpose() *
                     (hit->point - cam.pose.translation);
      Vec3 n_cam = cam.pose.rotation.transpose() * n_obj;
      if (n_cam[2] < 0.0) n_cam = -n_cam;

      const double d = std::clamp(s[2], -1.0, 1.0);
      vm.depth.at(x, y) = float(d);
      vm.normal.at(x, y) =
          Eigen::Vector3f(float(n_cam[0]), float(n_cam[1]), float(n_cam[2]));
      vm.mask.at(x, y) = 1;
    }
  });
  return m;
}

MapSet perturb_mapset(const MapSet& m, const PerturbationSpec& spec) {
  // depth_bias is a signed shift; the remaining magnitudes are bounds.
  for (double mag : {spec.view_bias, spec.depth_noise, spec.jitter_rotation_deg,
                     spec.jitter_translation, spec.normal_noise}) {
    if (mag < 0) throw ValidationError("perturbation magnitudes must be >= 0");
  }

  MapSet out = m;
  const bool zero = spec.depth_bias == 0.0 && spec.view_bias == 0.0 &&
                    spec.depth_noise == 0.0 && spec.jitter_rotation_deg == 0.0 &&
                    spec.jitter_translation == 0.0 && spec.normal_noise == 0.0;
  if (zero) return out;

  // One RNG stream per view, so views may be processed in parallel while
  // staying deterministic for any thread count.
  parallel_for(0, m.view_count(), [&](int64_t v) {
    std::mt19937_64 rng(mix_seed(spec.seed, uint64_t(v)));
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    double bias = spec.depth_bias;
    if (spec.view_bias > 0.0) {
      bias += spec.view_bias * (2.0 * uniform(rng) - 1.0);
    }
    if (spec.jitter_rotation_deg > 0.0 || spec.jitter_translation > 0.0) {
      const Vec3 axis = random_unit_vector(rng);
      const double angle =
          uniform(rng) * spec.jitter_rotation_deg * M_PI / 180.0;
      const Vec3 t_dir = random_unit_vector(rng);
      const double t_len = uniform(rng) * spec.jitter_translation;
      const RigidTransform jitter =
          RigidTransform::from_axis_angle(axis, angle, t_dir * t_len);
      OrthographicCamera& cam = out.rig.cameras[v];
      cam.pose = jitter.compose(cam.pose);
    }

    ViewMaps& vm = out.views[v];
    for (int y = 0; y < vm.depth.height(); ++y) {
      for (int x = 0; x < vm.depth.width(); ++x) {
        if (!vm.mask.at(x, y)) continue;
        double d = double(vm.depth.at(x, y)) + bias;
        if (spec.depth_noise > 0.0) d += spec.depth_noise * gauss(rng);
        vm.depth.at(x, y) = float(std::clamp(d, -1.0, 1.0));
        if (spec.normal_noise > 0.0) {
          const Vec3 axis = random_unit_vector(rng);
          const double angle = spec.normal_noise * gauss(rng);
          const Eigen::Vector3f nf = vm.normal.at(x, y);
          Vec3 n = Eigen::AngleAxisd(angle, axis) *
                   Vec3(nf[0], nf[1], nf[2]);
          n.normalize();
          vm.normal.at(x, y) =
              Eigen::Vector3f(float(n[0]), float(n[1]), float(n[2]));
        }
      }
    }
  });
  return out;
}

namespace {

// 8-connected component labels; returns the label whose component is
// largest (ties: the label discovered first in scan order).
int largest_component(const ForegroundMask& mask, Image<int>* labels) {
  *labels = Image<int>(mask.width(), mask.height(), -1);
  int best_label = -1;
  size_t best_size = 0;
  int next_label = 0;
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y) || labels->at(x, y) >= 0) continue;
      const int label = next_label++;
      size_t size = 0;
      stack.push_back({x, y});
      labels->at(x, y) = label;
      while (!stack.empty()) {
        const auto [cx, cy] = stack.back();
        stack.pop_back();
        ++size;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx, ny = cy + dy;
            if ((dx == 0 && dy == 0) || !mask.in_bounds(nx, ny)) continue;
            if (mask.at(nx, ny) && labels->at(nx, ny) < 0) {
              labels->at(nx, ny) = label;
              stack.push_back({nx, ny});
            }
          }
        }
      }
      if (size > best_size) {
        best_size = size;
        best_label = label;
      }
    }
  }
  return best_label;
}

}  // namespace

std::vector<Eigen::Vector2d> extract_silhouette_contour(
    const ForegroundMask& mask) {
  Image<int> labels;
  const int target = largest_component(mask, &labels);
  if (target < 0) {
    throw ValidationError("cannot extract contour from an empty mask");
  }
  const auto fg = [&](int x, int y) {
    return labels.in_bounds(x, y) && labels.at(x, y) == target;
  };

  // Start at the first component pixel in scan order; its bottom edge is
  // a boundary crack.
  int sx = -1, sy = -1;
  for (int y = 0; y < mask.height() && sx < 0; ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (fg(x, y)) {
        sx = x;
        sy = y;
        break;
      }
    }
  }

  // Crack following on the corner lattice: corner (cx, cy) is the lower
  // left corner of pixel (cx, cy). The walker keeps foreground on its
  // left, so the traversal is counterclockwise; diagonal saddle corners
  // resolve as 8-connected foreground (turn right first).
  // Headings: 0=E, 1=N, 2=W, 3=S.
  const int dir_dx[4] = {1, 0, -1, 0};
  const int dir_dy[4] = {0, 1, 0, -1};

  const auto ahead_left = [&](int cx, int cy, int heading,
                              int* px, int* py) {
    switch (heading) {
      case 0: *px = cx; *py = cy; break;
      case 1: *px = cx - 1; *py = cy; break;
      case 2: *px = cx - 1; *py = cy - 1; break;
      default: *px = cx; *py = cy - 1; break;
    }
  };
  const auto ahead_right = [&](int cx, int cy, int heading,
                               int* px, int* py) {
    switch (heading) {
      case 0: *px = cx; *py = cy - 1; break;
      case 1: *px = cx; *py = cy; break;
      case 2: *px = cx - 1; *py = cy; break;
      default: *px = cx - 1; *py = cy - 1; break;
    }
  };

  std::vector<Eigen::Vector2d> contour;
  int cx = sx, cy = sy;  // corner = lower-left corner of start pixel
  int heading = 0;       // east along the pixel's bottom edge
  const int start_cx = cx, start_cy = cy, start_heading = heading;
  const size_t hard_cap = size_t(mask.width()) * mask.height() * 4 + 8;
  do {
    // Midpoint of the crack being traversed, in pixel-center coordinates.
    contour.emplace_back(cx - 0.5 + 0.5 * dir_dx[heading],
                         cy - 0.5 + 0.5 * dir_dy[heading]);
    cx += dir_dx[heading];
    cy += dir_dy[heading];
    int ax, ay;
    ahead_right(cx, cy, heading, &ax, &ay);
    if (fg(ax, ay)) {
      heading = (heading + 3) % 4;  // turn right
    } else {
      ahead_left(cx, cy, heading, &ax, &ay);
      if (!fg(ax, ay)) heading = (heading + 1) % 4;  // turn left
    }
    if (contour.size() > hard_cap) {
      throw NumericalError("contour tracing failed to close");
    }
  } while (cx != start_cx || cy != start_cy || heading != start_heading);

  return contour;
}

}  // namespace mvf
