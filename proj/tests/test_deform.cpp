#include <doctest.h>

#include <random>

#include "mvf/deform.h"
#include "mvf/errors.h"
#include "mvf/render.h"
#include "support.h"

using namespace mvf;

namespace {

// Contours of the mesh's own rendered silhouette for a set of rig views.
ContourConstraintSet own_contours(const TriangleMesh& mesh, const ViewRig& rig,
                                  const std::vector<int>& views) {
  const MapSet m = render_mapset(mesh, rig);
  ContourConstraintSet out;
  for (int v : views) {
    ContourViewConstraint c;
    c.camera = rig.cameras[v];
    c.points = extract_silhouette_contour(m.views[v].mask);
    out.views.push_back(std::move(c));
  }
  return out;
}

}  // namespace

TEST_SUITE("deform") {

TEST_CASE("uniform laplacian on a flat regular grid vanishes inside") {
  // 5x5 grid in the z=0 plane, triangulated consistently.
  std::vector<Vec3> verts;
  std::vector<std::array<int, 3>> tris;
  const int n = 5;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) verts.push_back(Vec3(x, y, 0));
  for (int y = 0; y + 1 < n; ++y) {
    for (int x = 0; x + 1 < n; ++x) {
      const int a = y * n + x;
      tris.push_back({a, a + 1, a + n + 1});
      tris.push_back({a, a + n + 1, a + n});
    }
  }
  const TriangleMesh mesh(verts, tris);
  const auto L = uniform_laplacian(mesh);
  Eigen::MatrixXd V(n * n, 3);
  for (int i = 0; i < n * n; ++i) V.row(i) = verts[i].transpose();
  const Eigen::MatrixXd LV = L * V;
  // Interior vertices of this triangulation have a symmetric 6-ring.
  const int center = 2 * n + 2;
  CHECK(LV.row(center).norm() < 1e-12);
}

TEST_CASE("uniform laplacian of a tetrahedron matches the hand computation") {
  const TriangleMesh tet({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}},
                         {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}});
  const auto L = uniform_laplacian(tet);
  Eigen::MatrixXd V(4, 3);
  for (int i = 0; i < 4; ++i) V.row(i) = tet.vertices()[i].transpose();
  const Eigen::MatrixXd LV = L * V;
  for (int i = 0; i < 4; ++i) {
    Vec3 others = Vec3::Zero();
    for (int j = 0; j < 4; ++j) {
      if (j != i) others += tet.vertices()[j];
    }
    const Vec3 expected = tet.vertices()[i] - others / 3.0;
    CHECK((LV.row(i).transpose() - expected).norm() < 1e-14);
  }
}

TEST_CASE("laplacian coordinates rotate with the mesh") {
  const TriangleMesh mesh = mvftest::blob_fixture();
  const RigidTransform t = RigidTransform::from_axis_angle(
      Vec3(0.2, 1.0, 0.4), 0.8, Vec3(0.1, -0.2, 0.05));
  const TriangleMesh moved = mesh.transformed(t);
  const auto L = uniform_laplacian(mesh);
  const auto Lm = uniform_laplacian(moved);
  const int n = int(mesh.vertices().size());
  Eigen::MatrixXd V(n, 3), Vm(n, 3);
  for (int i = 0; i < n; ++i) {
    V.row(i) = mesh.vertices()[i].transpose();
    Vm.row(i) = moved.vertices()[i].transpose();
  }
  const Eigen::MatrixXd LV = L * V;
  const Eigen::MatrixXd LVm = Lm * Vm;
  for (int i = 0; i < n; i += 97) {
    const Vec3 rotated = t.rotation * LV.row(i).transpose();
    CHECK((LVm.row(i).transpose() - rotated).norm() < 1e-12);
  }
}

TEST_CASE("isolated vertices are rejected") {
  const TriangleMesh mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {5, 5, 5}},
                          {{0, 1, 2}});
  CHECK_THROWS_AS(uniform_laplacian(mesh), ValidationError);
}

TEST_CASE("own projected silhouette as constraints is an exact fixed point") {
  const TriangleMesh mesh = mvftest::sphere_fixture();
  const ViewRig rig = icosahedron_rig(64, 64);
  ContourConstraintSet constraints;
  for (int v : {0, 4, 8}) {
    ContourViewConstraint c;
    c.camera = rig.cameras[v];
    for (int vtx : silhouette_vertices(mesh, c.camera)) {
      const auto p = c.camera.project(mesh.vertices()[vtx]);
      c.points.push_back(Eigen::Vector2d(p.px, p.py));
    }
    REQUIRE(c.points.size() >= 8);
    constraints.views.push_back(std::move(c));
  }
  const DeformResult r = deform_to_contours(mesh, constraints);
  REQUIRE(r.mesh.vertices().size() == mesh.vertices().size());
  double max_move = 0.0;
  for (size_t i = 0; i < mesh.vertices().size(); ++i) {
    max_move = std::max(max_move,
                        (r.mesh.vertices()[i] - mesh.vertices()[i]).norm());
  }
  CHECK(max_move < 1e-6);
  CHECK(r.skipped_views.empty());
}

TEST_CASE("rendered-mask contours keep the mesh within a pixel") {
  const TriangleMesh mesh = mvftest::sphere_fixture();
  const ViewRig rig = icosahedron_rig(64, 64);
  const auto constraints = own_contours(mesh, rig, {0, 4, 8});
  const DeformResult r = deform_to_contours(mesh, constraints);
  double max_move = 0.0;
  for (size_t i = 0; i < mesh.vertices().size(); ++i) {
    max_move = std::max(max_move,
                        (r.mesh.vertices()[i] - mesh.vertices()[i]).norm());
  }
  // Mask contours sit within about half a pixel of the true silhouette.
  CHECK(max_move < 2.0 * rig.kappa());
}

TEST_CASE("zero contour weight is an identity deformation") {
  const TriangleMesh mesh = mvftest::torus_fixture();
  const ViewRig rig = icosahedron_rig(48, 48);
  const auto constraints = own_contours(mesh, rig, {1, 6});
  DeformOptions options;
  options.contour_weight = 0.0;
  const DeformResult r = deform_to_contours(mesh, constraints, options);
  for (size_t i = 0; i < mesh.vertices().size(); ++i) {
    CHECK((r.mesh.vertices()[i] - mesh.vertices()[i]).norm() < 1e-9);
  }
}

TEST_CASE("inflated contours pull the silhouette outward") {
  const TriangleMesh mesh = mvftest::sphere_fixture();
  const ViewRig rig = icosahedron_rig(64, 64);
  ContourConstraintSet constraints = own_contours(mesh, rig, {0});
  // Inflate the contour 10% around the image center.
  for (auto& p : constraints.views[0].points) {
    p = (p - Eigen::Vector2d(31.5, 31.5)) * 1.1 + Eigen::Vector2d(31.5, 31.5);
  }

  const double before = mean_contour_residual(mesh, constraints);
  const DeformResult r = deform_to_contours(mesh, constraints);
  CHECK(r.contour_residual_before == doctest::Approx(before));
  CHECK(r.contour_residual_after < 0.5 * before);

  // Connectivity identical; vertices moved but boundedly.
  REQUIRE(r.mesh.triangle_count() == mesh.triangle_count());
  for (size_t t = 0; t < mesh.triangle_count(); ++t) {
    CHECK(r.mesh.triangles()[t] == mesh.triangles()[t]);
  }
}

TEST_CASE("deformation is equivariant under a rigid motion") {
  const TriangleMesh mesh = mvftest::sphere_fixture();
  const ViewRig rig = icosahedron_rig(48, 48);
  ContourConstraintSet constraints = own_contours(mesh, rig, {2});
  for (auto& p : constraints.views[0].points) {
    p = (p - Eigen::Vector2d(23.5, 23.5)) * 1.08 + Eigen::Vector2d(23.5, 23.5);
  }
  const DeformResult base = deform_to_contours(mesh, constraints);

  const RigidTransform t = RigidTransform::from_axis_angle(
      Vec3(0.3, 0.8, 0.1), 0.6, Vec3(0.02, 0.01, -0.03));
  ContourConstraintSet moved_constraints = constraints;
  moved_constraints.views[0].camera.pose =
      t.compose(constraints.views[0].camera.pose);
  const DeformResult moved =
      deform_to_contours(mesh.transformed(t), moved_constraints);

  for (size_t i = 0; i < mesh.vertices().size(); i += 131) {
    const Vec3 expected = t.apply(base.mesh.vertices()[i]);
    CHECK((moved.mesh.vertices()[i] - expected).norm() < 1e-5);
  }
}

TEST_CASE("raising the contour weight does not raise the contour residual") {
  const TriangleMesh mesh = mvftest::sphere_fixture();
  const ViewRig rig = icosahedron_rig(48, 48);
  ContourConstraintSet constraints = own_contours(mesh, rig, {0});
  for (auto& p : constraints.views[0].points) {
    p = (p - Eigen::Vector2d(23.5, 23.5)) * 1.1 + Eigen::Vector2d(23.5, 23.5);
  }
  DeformOptions low, high;
  low.contour_weight = 0.25;
  high.contour_weight = 1.0;
  const DeformResult a = deform_to_contours(mesh, constraints, low);
  const DeformResult b = deform_to_contours(mesh, constraints, high);
  CHECK(b.contour_residual_after <= a.contour_residual_after + 1e-6);
}

}  // TEST_SUITE
