#include "mvf/camera.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "mvf/errors.h"

namespace mvf {

namespace {

// Camera basis for a view position u (unit vector): +z points from the
// object toward the camera, image up follows the up axis projected onto
// the image plane, +x completes a right-handed frame.
Mat3 look_at_origin(const Vec3& u, const Vec3& up_axis) {
  Vec3 up = up_axis;
  if (std::abs(up.dot(u)) > 1.0 - 1e-6) up = Vec3::UnitX();
  const Vec3 y = (up - up.dot(u) * u).normalized();
  const Vec3 x = y.cross(u);
  Mat3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = u;
  return r;
}

}  // namespace

ViewRig icosahedron_rig(int width, int height) {
  if (width < 2 || height < 2) {
    throw ValidationError("rig image dimensions must be at least 2x2");
  }

  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> vertices;
  vertices.reserve(12);
  for (double s1 : {-1.0, 1.0}) {
    for (double s2 : {-1.0, 1.0}) {
      vertices.push_back(Vec3(0.0, s1, s2 * phi).normalized());
      vertices.push_back(Vec3(s1, s2 * phi, 0.0).normalized());
      vertices.push_back(Vec3(s1 * phi, 0.0, s2).normalized());
    }
  }
  std::sort(vertices.begin(), vertices.end(), [](const Vec3& a, const Vec3& b) {
    if (a[0] != b[0]) return a[0] < b[0];
    if (a[1] != b[1]) return a[1] < b[1];
    return a[2] < b[2];
  });

  ViewRig rig;
  rig.up_axis = Vec3::UnitY();
  const double kappa = 2.0 / std::min(width, height);
  for (const Vec3& u : vertices) {
    OrthographicCamera cam;
    cam.pose.rotation = look_at_origin(u, rig.up_axis);
    cam.pose.translation = Vec3::Zero();
    cam.kappa = kappa;
    cam.width = width;
    cam.height = height;
    rig.cameras.push_back(cam);
  }
  return rig;
}

void write_rig_json(const std::filesystem::path& path, const ViewRig& rig) {
  nlohmann::json j;
  j["width"] = rig.width();
  j["height"] = rig.height();
  j["kappa"] = rig.kappa();
  nlohmann::json cams = nlohmann::json::array();
  for (const auto& cam : rig.cameras) {
    nlohmann::json c;
    std::vector<double> rot(9);
    for (int r = 0; r < 3; ++r)
      for (int col = 0; col < 3; ++col) rot[r * 3 + col] = cam.pose.rotation(r, col);
    c["rotation"] = rot;
    c["translation"] = {cam.pose.translation[0], cam.pose.translation[1],
                        cam.pose.translation[2]};
    cams.push_back(c);
  }
  j["cameras"] = cams;

  std::ofstream out(path);
  if (!out) throw IoError("cannot write rig manifest: " + path.string());
  out << j.dump(2) << '\n';
}

ViewRig read_rig_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open rig manifest: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed rig manifest " + path.string() + ": " + e.what());
  }

  ViewRig rig;
  try {
    const int width = j.at("width").get<int>();
    const int height = j.at("height").get<int>();
    const double kappa = j.at("kappa").get<double>();
    if (width < 2 || height < 2 || kappa <= 0.0) {
      throw ValidationError("rig manifest has invalid dimensions or kappa: " +
                            path.string());
    }
    for (const auto& c : j.at("cameras")) {
      OrthographicCamera cam;
      const auto rot = c.at("rotation").get<std::vector<double>>();
      const auto tr = c.at("translation").get<std::vector<double>>();
      if (rot.size() != 9 || tr.size() != 3) {
        throw IoError("rig manifest camera entry malformed: " + path.string());
      }
      for (int r = 0; r < 3; ++r)
        for (int col = 0; col < 3; ++col) cam.pose.rotation(r, col) = rot[r * 3 + col];
      cam.pose.translation = Vec3(tr[0], tr[1], tr[2]);
      if (!cam.pose.is_valid(1e-9)) {
        throw ValidationError("rig manifest camera " +
                              std::to_string(rig.cameras.size()) +
                              " rotation is not orthonormal: " + path.string());
      }
      cam.kappa = kappa;
      cam.width = width;
      cam.height = height;
      rig.cameras.push_back(cam);
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed rig manifest " + path.string() + ": " + e.what());
  }
  return rig;
}

}  // namespace mvf
