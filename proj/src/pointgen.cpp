#include "mvf/pointgen.h"

#include "mvf/parallel.h"

namespace mvf {

std::vector<Vec3> PointSet::positions() const {
  std::vector<Vec3> out(points.size());
  for (size_t i = 0; i < points.size(); ++i) out[i] = points[i].position;
  return out;
}

Image<uint8_t> silhouette_pixels(const ForegroundMask& mask) {
  Image<uint8_t> sil(mask.width(), mask.height(), 0);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      bool boundary = false;
      for (int dy = -1; dy <= 1 && !boundary; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = x + dx, ny = y + dy;
          if (!mask.in_bounds(nx, ny) || !mask.at(nx, ny)) {
            boundary = true;
            break;
          }
        }
      }
      sil.at(x, y) = boundary ? 1 : 0;
    }
  }
  return sil;
}

std::vector<PointSet> generate_points(const MapSet& m) {
  std::vector<PointSet> sets(m.view_count());
  parallel_for(0, m.view_count(), [&](int64_t v) {
    const OrthographicCamera& cam = m.rig.cameras[v];
    const ViewMaps& vm = m.views[v];
    const Image<uint8_t> sil = silhouette_pixels(vm.mask);
    PointSet& set = sets[v];
    set.points.reserve(vm.foreground_count());
    for (int y = 0; y < vm.mask.height(); ++y) {
      for (int x = 0; x < vm.mask.width(); ++x) {
        if (!vm.mask.at(x, y)) continue;
        PointRecord rec;
        rec.position = cam.unproject(double(x), double(y),
                                     double(vm.depth.at(x, y)));
        const Eigen::Vector3f& nf = vm.normal.at(x, y);
        rec.normal = cam.pose.rotation * Vec3(nf[0], nf[1], nf[2]);
        rec.view = int(v);
        rec.px = x;
        rec.py = y;
        rec.silhouette = sil.at(x, y) != 0;
        set.points.push_back(rec);
      }
    }
  });
  return sets;
}

OrientedPointCloud concatenate_points(const std::vector<PointSet>& sets) {
  OrientedPointCloud cloud;
  size_t total = 0;
  for (const auto& s : sets) total += s.size();
  cloud.positions.reserve(total);
  cloud.normals.reserve(total);
  for (const auto& s : sets) {
    for (const auto& p : s.points) {
      cloud.positions.push_back(p.position);
      cloud.normals.push_back(p.normal);
    }
  }
  return cloud;
}

}  // namespace mvf
