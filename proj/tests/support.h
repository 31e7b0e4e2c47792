#pragma once

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include "mvf/mesh.h"
#include "mvf/primitives.h"

namespace mvftest {

// Standard fixtures: all fit inside the unit view sphere.
inline mvf::TriangleMesh sphere_fixture() { return mvf::make_icosphere(0.8, 4); }
inline mvf::TriangleMesh box_fixture() {
  return mvf::make_box(mvf::Vec3(0.3, 0.3, 0.3));
}
inline mvf::TriangleMesh torus_fixture() {
  return mvf::make_torus(0.6, 0.2, 64, 32);
}
inline mvf::TriangleMesh blob_fixture() { return mvf::make_blob(0.95, 4); }

// Deterministic random point in a box.
inline mvf::Vec3 random_point(std::mt19937_64& rng, double extent) {
  std::uniform_real_distribution<double> u(-extent, extent);
  return mvf::Vec3(u(rng), u(rng), u(rng));
}

// Scratch directory under the build tree, unique per tag, wiped on entry.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / ("mvfuse_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace mvftest
