#include "mvf/maps.h"

#include <cmath>
#include <cstring>

namespace mvf {

int ViewMaps::foreground_count() const {
  int n = 0;
  for (uint8_t v : mask.data()) n += (v != 0);
  return n;
}

std::vector<Violation> validate_mapset(const MapSet& m) {
  std::vector<Violation> out;

  if (int(m.views.size()) != m.rig.view_count()) {
    out.push_back({-1, -1, -1, "view_count",
                   "map triples: " + std::to_string(m.views.size()) +
                       ", rig cameras: " + std::to_string(m.rig.view_count())});
    return out;
  }

  for (int v = 0; v < int(m.views.size()); ++v) {
    const ViewMaps& vm = m.views[v];
    const int w = m.rig.width();
    const int h = m.rig.height();
    if (vm.depth.width() != w || vm.depth.height() != h ||
        vm.normal.width() != w || vm.normal.height() != h ||
        vm.mask.width() != w || vm.mask.height() != h) {
      out.push_back({v, -1, -1, "dimensions",
                     "maps of view " + std::to_string(v) +
                         " do not match the rig image size"});
      continue;
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const bool fg = vm.mask.at(x, y) != 0;
        const float d = vm.depth.at(x, y);
        const Eigen::Vector3f& n = vm.normal.at(x, y);
        if (!std::isfinite(d)) {
          out.push_back({v, x, y, "depth_finite", "depth is not finite"});
        } else if (fg && (d < -1.0f || d > 1.0f)) {
          out.push_back({v, x, y, "depth_range",
                         "foreground depth " + std::to_string(d) +
                             " outside [-1, 1]"});
        } else if (!fg && d != 0.0f) {
          out.push_back({v, x, y, "background_depth",
                         "background depth must hold the placeholder 0"});
        }
        if (!n.allFinite()) {
          out.push_back({v, x, y, "normal_finite", "normal is not finite"});
        } else if (fg) {
          const float len = n.norm();
          if (std::abs(len - 1.0f) > 1e-3f) {
            out.push_back({v, x, y, "normal_unit",
                           "foreground normal has length " +
                               std::to_string(len)});
          }
        } else if (n != Eigen::Vector3f(0.0f, 0.0f, 1.0f)) {
          out.push_back({v, x, y, "background_normal",
                         "background normal must hold the placeholder (0,0,1)"});
        }
        if (vm.mask.at(x, y) > 1) {
          out.push_back({v, x, y, "mask_binary", "mask value must be 0 or 1"});
        }
      }
    }
  }
  return out;
}

bool mapsets_equal(const MapSet& a, const MapSet& b) {
  if (a.views.size() != b.views.size()) return false;
  if (a.rig.view_count() != b.rig.view_count()) return false;
  if (a.rig.width() != b.rig.width() || a.rig.height() != b.rig.height())
    return false;
  if (a.rig.kappa() != b.rig.kappa()) return false;
  for (int v = 0; v < a.rig.view_count(); ++v) {
    const auto& ca = a.rig.cameras[v];
    const auto& cb = b.rig.cameras[v];
    if (std::memcmp(ca.pose.rotation.data(), cb.pose.rotation.data(),
                    9 * sizeof(double)) != 0)
      return false;
    if (std::memcmp(ca.pose.translation.data(), cb.pose.translation.data(),
                    3 * sizeof(double)) != 0)
      return false;
  }
  for (size_t v = 0; v < a.views.size(); ++v) {
    const auto& va = a.views[v];
    const auto& vb = b.views[v];
    if (!(va.mask == vb.mask)) return false;
    if (va.depth.width() != vb.depth.width() ||
        va.depth.height() != vb.depth.height())
      return false;
    if (std::memcmp(va.depth.data().data(), vb.depth.data().data(),
                    va.depth.data().size() * sizeof(float)) != 0)
      return false;
    if (std::memcmp(va.normal.data().data(), vb.normal.data().data(),
                    va.normal.data().size() * sizeof(Eigen::Vector3f)) != 0)
      return false;
  }
  return true;
}

}  // namespace mvf
