#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mvf/camera.h"

namespace mvf {

// Dense row-major image grid. Row y = 0 is the bottom of the image
// (camera-frame y grows upward with the pixel row index).
template <typename T>
class Image {
 public:
  Image() = default;
  Image(int width, int height, const T& fill = T())
      : width_(width), height_(height), data_(size_t(width) * height, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }

  T& at(int x, int y) { return data_[size_t(y) * width_ + x]; }
  const T& at(int x, int y) const { return data_[size_t(y) * width_ + x]; }

  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width_ && y >= 0 && y < height_;
  }

  const std::vector<T>& data() const { return data_; }
  std::vector<T>& data() { return data_; }

  bool operator==(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_ &&
           data_ == other.data_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

// Depth in [-1, 1] at foreground pixels; background pixels hold the
// placeholder 0.
using DepthMap = Image<float>;

// Camera-frame unit normals at foreground pixels (visible surfaces have
// n_z > 0); background pixels hold the placeholder (0, 0, 1).
using NormalMap = Image<Eigen::Vector3f>;

// 1 = foreground, 0 = background.
using ForegroundMask = Image<uint8_t>;

struct ViewMaps {
  DepthMap depth;
  NormalMap normal;
  ForegroundMask mask;

  int foreground_count() const;
};

// Per-view depth/normal/mask triples tied to a rig; the input and output
// of the fusion problem.
struct MapSet {
  ViewRig rig;
  std::vector<ViewMaps> views;

  int view_count() const { return int(views.size()); }
};

struct Violation {
  int view = -1;  // -1: set-level problem
  int x = -1, y = -1;
  std::string rule;
  std::string detail;
};

// Empty result iff every type invariant holds. Violations are data, not
// errors; loaders turn them into exceptions.
std::vector<Violation> validate_mapset(const MapSet& m);

// Bitwise equality of dimensions, rig parameters and pixel payloads.
bool mapsets_equal(const MapSet& a, const MapSet& b);

}  // namespace mvf
