#include <doctest.h>

#include <cmath>
#include <cstring>

#include "mvf/errors.h"
#include "mvf/parallel.h"
#include "mvf/render.h"
#include "support.h"

using namespace mvf;

TEST_SUITE("render") {

TEST_CASE("sphere center pixel depth is the radius in every view") {
  const ViewRig rig = icosahedron_rig(64, 64);
  const MapSet m = render_mapset(mvftest::sphere_fixture(), rig);
  // Facet sagitta bound for the subdivided icosahedron.
  const double edge = 2.0 * M_PI * 0.8 / (5 * 16);
  const double sagitta = edge * edge / (8.0 * 0.8);
  for (int v = 0; v < 12; ++v) {
    // 64^2 has no center pixel; probe the four around the center.
    for (int x : {31, 32}) {
      for (int y : {31, 32}) {
        REQUIRE(m.views[v].mask.at(x, y) == 1);
        const double center_offset2 =
            2.0 * std::pow(rig.kappa() * 0.5, 2.0);  // half-pixel diagonal
        const double analytic =
            std::sqrt(0.8 * 0.8 - center_offset2);
        CHECK(std::abs(double(m.views[v].depth.at(x, y)) - analytic) <
              4 * sagitta + 1e-4);
      }
    }
  }
}

TEST_CASE("rays that miss leave background placeholders") {
  const MapSet m = render_mapset(mvftest::sphere_fixture(),
                                 icosahedron_rig(32, 32));
  for (const auto& vm : m.views) {
    CHECK(vm.mask.at(0, 0) == 0);  // corner is outside the disk
    CHECK(vm.depth.at(0, 0) == 0.0f);
    CHECK(vm.normal.at(0, 0) == Eigen::Vector3f(0, 0, 1));
  }
}

TEST_CASE("frontal box face renders normal (0,0,1) across the interior") {
  // Identity-pose camera looking down -z at the box's +z face.
  ViewRig rig;
  OrthographicCamera cam;
  cam.kappa = 2.0 / 64;
  cam.width = cam.height = 64;
  rig.cameras.push_back(cam);
  const MapSet m = render_mapset(mvftest::box_fixture(), rig);
  int interior = 0;
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      if (!m.views[0].mask.at(x, y)) continue;
      ++interior;
      CHECK(m.views[0].normal.at(x, y) == Eigen::Vector3f(0, 0, 1));
      CHECK(m.views[0].depth.at(x, y) == doctest::Approx(0.3).epsilon(1e-6));
    }
  }
  CHECK(interior > 0);
}

TEST_CASE("foreground pixels unproject onto the source mesh within kappa") {
  const TriangleMesh mesh = mvftest::torus_fixture();
  const ViewRig rig = icosahedron_rig(64, 64);
  const MapSet m = render_mapset(mesh, rig);
  for (int v = 0; v < 12; ++v) {
    const auto& vm = m.views[v];
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) {
        if (!vm.mask.at(x, y)) continue;
        const Vec3 q = rig.cameras[v].unproject(x, y, vm.depth.at(x, y));
        CHECK(mesh.nearest_surface_point(q).distance <= rig.kappa());
      }
    }
  }
}

TEST_CASE("rendered normals face the camera") {
  const MapSet m = render_mapset(mvftest::blob_fixture(),
                                 icosahedron_rig(48, 48));
  for (const auto& vm : m.views) {
    for (int y = 0; y < 48; ++y) {
      for (int x = 0; x < 48; ++x) {
        if (vm.mask.at(x, y)) CHECK(vm.normal.at(x, y)[2] > 0.0f);
      }
    }
  }
}

TEST_CASE("rendering is bitwise deterministic across thread counts") {
  const TriangleMesh mesh = mvftest::sphere_fixture();
  const ViewRig rig = icosahedron_rig(64, 64);
  set_max_threads(1);
  const MapSet a = render_mapset(mesh, rig);
  set_max_threads(8);
  const MapSet b = render_mapset(mesh, rig);
  set_max_threads(0);
  CHECK(mapsets_equal(a, b));
}

TEST_CASE("meshes outside the unit sphere are rejected") {
  const TriangleMesh big = make_box(Vec3(0.9, 0.9, 0.9));
  CHECK_THROWS_AS(render_mapset(big, icosahedron_rig(16, 16)),
                  ValidationError);
}

TEST_CASE("smooth normals improve curved-surface normals") {
  const TriangleMesh sphere = make_icosphere(0.8, 2);  // coarse on purpose
  ViewRig rig;
  OrthographicCamera cam;
  cam.kappa = 2.0 / 64;
  cam.width = cam.height = 64;
  rig.cameras.push_back(cam);
  RenderOptions smooth;
  smooth.smooth_normals = true;
  const MapSet flat = render_mapset(sphere, rig);
  const MapSet soft = render_mapset(sphere, rig, smooth);
  double err_flat = 0, err_soft = 0;
  int count = 0;
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      if (!flat.views[0].mask.at(x, y)) continue;
      const Vec3 q = cam.unproject(x, y, flat.views[0].depth.at(x, y));
      const Vec3 analytic = q.normalized();  // sphere normal
      const auto angle = [&](const NormalMap& nm) {
        const Eigen::Vector3f nf = nm.at(x, y);
        return std::acos(std::clamp(Vec3(nf[0], nf[1], nf[2]).dot(analytic),
                                    -1.0, 1.0));
      };
      err_flat += angle(flat.views[0].normal);
      err_soft += angle(soft.views[0].normal);
      ++count;
    }
  }
  REQUIRE(count > 0);
  CHECK(err_soft < err_flat);
}

}  // TEST_SUITE

TEST_SUITE("perturb") {

TEST_CASE("zero spec returns a bitwise copy") {
  const MapSet m = render_mapset(mvftest::sphere_fixture(),
                                 icosahedron_rig(32, 32));
  const MapSet p = perturb_mapset(m, PerturbationSpec{});
  CHECK(mapsets_equal(m, p));
}

TEST_CASE("constant bias shifts every foreground depth") {
  const MapSet m = render_mapset(mvftest::sphere_fixture(),
                                 icosahedron_rig(32, 32));
  PerturbationSpec spec;
  spec.depth_bias = 0.05;
  const MapSet p = perturb_mapset(m, spec);
  for (int v = 0; v < m.view_count(); ++v) {
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 32; ++x) {
        if (!m.views[v].mask.at(x, y)) {
          CHECK(p.views[v].depth.at(x, y) == 0.0f);
          continue;
        }
        const double delta = double(p.views[v].depth.at(x, y)) -
                             double(m.views[v].depth.at(x, y));
        CHECK(std::abs(delta - 0.05) < 1e-6);
      }
    }
  }
}

TEST_CASE("noise stddev lands in the chi-square window") {
  const MapSet m = render_mapset(mvftest::sphere_fixture(),
                                 icosahedron_rig(128, 128));
  PerturbationSpec spec;
  spec.depth_noise = 0.01;
  spec.seed = 99;
  const MapSet p = perturb_mapset(m, spec);
  double sum = 0, sum2 = 0;
  int64_t n = 0;
  for (int v = 0; v < m.view_count(); ++v) {
    for (int y = 0; y < 128; ++y) {
      for (int x = 0; x < 128; ++x) {
        if (!m.views[v].mask.at(x, y)) continue;
        const double d = double(p.views[v].depth.at(x, y)) -
                         double(m.views[v].depth.at(x, y));
        sum += d;
        sum2 += d * d;
        ++n;
      }
    }
  }
  REQUIRE(n > 10000);
  const double mean = sum / double(n);
  const double stddev = std::sqrt(sum2 / double(n) - mean * mean);
  CHECK(stddev > 0.009);
  CHECK(stddev < 0.011);
}

TEST_CASE("masks and normals untouched by depth-only perturbation") {
  const MapSet m = render_mapset(mvftest::box_fixture(),
                                 icosahedron_rig(32, 32));
  PerturbationSpec spec;
  spec.depth_bias = 0.02;
  spec.depth_noise = 0.004;
  spec.seed = 3;
  const MapSet p = perturb_mapset(m, spec);
  for (int v = 0; v < m.view_count(); ++v) {
    CHECK(m.views[v].mask == p.views[v].mask);
    CHECK(std::memcmp(m.views[v].normal.data().data(),
                      p.views[v].normal.data().data(),
                      m.views[v].normal.data().size() *
                          sizeof(Eigen::Vector3f)) == 0);
  }
}

TEST_CASE("rigid jitter composes onto the camera pose deterministically") {
  const MapSet m = render_mapset(mvftest::sphere_fixture(),
                                 icosahedron_rig(32, 32));
  PerturbationSpec spec;
  spec.jitter_rotation_deg = 3.0;
  spec.jitter_translation = 0.03;
  spec.seed = 12;
  const MapSet a = perturb_mapset(m, spec);
  const MapSet b = perturb_mapset(m, spec);
  CHECK(mapsets_equal(a, b));
  int changed = 0;
  for (int v = 0; v < m.view_count(); ++v) {
    const double diff = (a.rig.cameras[v].pose.rotation -
                         m.rig.cameras[v].pose.rotation)
                            .cwiseAbs()
                            .maxCoeff();
    if (diff > 0) ++changed;
    CHECK(a.rig.cameras[v].pose.is_valid(1e-9));
    // Rotation stays under the bound.
    const Mat3 rel = a.rig.cameras[v].pose.rotation *
                     m.rig.cameras[v].pose.rotation.transpose();
    RigidTransform t;
    t.rotation = rel;
    CHECK(t.rotation_angle() <= 3.0 * M_PI / 180.0 + 1e-9);
    CHECK((a.rig.cameras[v].pose.translation -
           m.rig.cameras[v].pose.translation)
              .norm() <= 0.03 + 1e-12);
  }
  CHECK(changed == m.view_count());
  // Depth payloads are untouched by pure pose jitter.
  for (int v = 0; v < m.view_count(); ++v) {
    CHECK(std::memcmp(m.views[v].depth.data().data(),
                      a.views[v].depth.data().data(),
                      m.views[v].depth.data().size() * sizeof(float)) == 0);
  }
}

TEST_CASE("normal noise keeps normals unit length") {
  const MapSet m = render_mapset(mvftest::sphere_fixture(),
                                 icosahedron_rig(32, 32));
  PerturbationSpec spec;
  spec.normal_noise = 0.05;
  spec.seed = 5;
  const MapSet p = perturb_mapset(m, spec);
  const auto violations = validate_mapset(p);
  CHECK(violations.empty());
}

}  // TEST_SUITE

TEST_SUITE("contour") {

TEST_CASE("filled square boundary has one midpoint per boundary edge") {
  ForegroundMask mask(10, 10, 0);
  for (int y = 2; y <= 7; ++y)
    for (int x = 2; x <= 7; ++x) mask.at(x, y) = 1;
  const auto contour = extract_silhouette_contour(mask);
  CHECK(contour.size() == 24);  // 4 * 6 boundary edges
  // All points sit on pixel-edge midpoints of the square's boundary:
  // exactly one coordinate is integral, both stay on the rim.
  for (const auto& p : contour) {
    const bool xi = std::abs(p[0] - std::round(p[0])) < 1e-12;
    const bool yi = std::abs(p[1] - std::round(p[1])) < 1e-12;
    CHECK(xi != yi);
    CHECK(p[0] >= 1.5 - 1e-12);
    CHECK(p[0] <= 7.5 + 1e-12);
    CHECK(p[1] >= 1.5 - 1e-12);
    CHECK(p[1] <= 7.5 + 1e-12);
  }
}

TEST_CASE("single pixel yields its four edge midpoints") {
  ForegroundMask mask(5, 5, 0);
  mask.at(2, 3) = 1;
  const auto contour = extract_silhouette_contour(mask);
  REQUIRE(contour.size() == 4);
  // The set of midpoints around pixel (2, 3).
  bool bottom = false, top = false, left = false, right = false;
  for (const auto& p : contour) {
    if (p == Eigen::Vector2d(2.0, 2.5)) bottom = true;
    if (p == Eigen::Vector2d(2.0, 3.5)) top = true;
    if (p == Eigen::Vector2d(1.5, 3.0)) left = true;
    if (p == Eigen::Vector2d(2.5, 3.0)) right = true;
  }
  CHECK(bottom);
  CHECK(top);
  CHECK(left);
  CHECK(right);
}

TEST_CASE("disk contour point count matches the taxicab perimeter") {
  const int r = 50;
  ForegroundMask mask(128, 128, 0);
  for (int y = 0; y < 128; ++y) {
    for (int x = 0; x < 128; ++x) {
      if ((x - 64) * (x - 64) + (y - 64) * (y - 64) <= r * r) mask.at(x, y) = 1;
    }
  }
  const auto contour = extract_silhouette_contour(mask);
  const double expected = 8.0 * r;  // taxicab perimeter of a circle
  CHECK(double(contour.size()) > 0.9 * expected);
  CHECK(double(contour.size()) < 1.1 * expected);
}

TEST_CASE("largest component wins; empty mask is an error") {
  ForegroundMask mask(16, 16, 0);
  CHECK_THROWS_AS(extract_silhouette_contour(mask), ValidationError);
  // Small blob of 1 pixel and big blob of 3x3.
  mask.at(1, 1) = 1;
  for (int y = 8; y < 11; ++y)
    for (int x = 8; x < 11; ++x) mask.at(x, y) = 1;
  const auto contour = extract_silhouette_contour(mask);
  CHECK(contour.size() == 12);  // 3x3 square boundary
}

}  // TEST_SUITE
