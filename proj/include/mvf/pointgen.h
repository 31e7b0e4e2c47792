#pragma once

#include <vector>

#include "mvf/maps.h"
#include "mvf/mesh.h"

namespace mvf {

// One oriented object-space point per foreground pixel, with provenance.
struct PointRecord {
  Vec3 position;
  Vec3 normal;
  int view = -1;
  int px = -1, py = -1;
  bool silhouette = false;
};

struct PointSet {
  std::vector<PointRecord> points;

  size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  std::vector<Vec3> positions() const;
};

// Foreground pixels with at least one background pixel among their 8
// neighbors; the image border counts as background. Returned as a 0/1
// image of the same size.
Image<uint8_t> silhouette_pixels(const ForegroundMask& mask);

// Maps every foreground pixel to a 3D point by unprojection, rotating the
// camera-frame normal into object space. One set per view, in view order.
std::vector<PointSet> generate_points(const MapSet& m);

// The naive reconstruction: all per-view sets in one cloud.
OrientedPointCloud concatenate_points(const std::vector<PointSet>& sets);

}  // namespace mvf
