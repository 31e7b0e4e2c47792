#include "mvf/deform.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <Eigen/IterativeLinearSolvers>

#include "mvf/errors.h"

namespace mvf {

namespace {

std::vector<std::vector<int>> vertex_neighbors(const TriangleMesh& mesh) {
  std::vector<std::set<int>> adj(mesh.vertices().size());
  for (const auto& tri : mesh.triangles()) {
    for (int k = 0; k < 3; ++k) {
      adj[tri[k]].insert(tri[(k + 1) % 3]);
      adj[tri[k]].insert(tri[(k + 2) % 3]);
    }
  }
  std::vector<std::vector<int>> out(adj.size());
  for (size_t i = 0; i < adj.size(); ++i) {
    out[i].assign(adj[i].begin(), adj[i].end());
  }
  return out;
}

}  // namespace

Eigen::SparseMatrix<double> uniform_laplacian(const TriangleMesh& mesh) {
  const auto neighbors = vertex_neighbors(mesh);
  const int n = int(mesh.vertices().size());

  std::vector<Eigen::Triplet<double>> triplets;
  for (int i = 0; i < n; ++i) {
    if (neighbors[i].empty()) {
      throw ValidationError("vertex " + std::to_string(i) +
                            " is isolated; Laplacian undefined");
    }
    triplets.emplace_back(i, i, 1.0);
    const double w = -1.0 / double(neighbors[i].size());
    for (int j : neighbors[i]) triplets.emplace_back(i, j, w);
  }

  Eigen::SparseMatrix<double> L(n, n);
  L.setFromTriplets(triplets.begin(), triplets.end());
  L.makeCompressed();
  return L;
}

std::vector<int> silhouette_vertices(const TriangleMesh& mesh,
                                     const OrthographicCamera& camera) {
  const Vec3 axis = camera.view_axis();
  const int n = int(mesh.vertices().size());
  std::vector<uint8_t> has_front(n, 0), has_back(n, 0), on_boundary(n, 0);

  std::map<std::pair<int, int>, int> edge_count;
  for (size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const bool front = mesh.face_normal(int(t)).dot(axis) > 0.0;
    for (int k = 0; k < 3; ++k) {
      (front ? has_front : has_back)[tri[k]] = 1;
      const auto edge = std::minmax(tri[k], tri[(k + 1) % 3]);
      ++edge_count[edge];
    }
  }
  for (const auto& [edge, count] : edge_count) {
    if (count == 1) {
      on_boundary[edge.first] = 1;
      on_boundary[edge.second] = 1;
    }
  }

  std::vector<int> out;
  for (int i = 0; i < n; ++i) {
    if ((has_front[i] && has_back[i]) || on_boundary[i]) out.push_back(i);
  }
  return out;
}

double mean_contour_residual(const TriangleMesh& mesh,
                             const ContourConstraintSet& constraints) {
  double sum = 0.0;
  size_t count = 0;
  for (const auto& view : constraints.views) {
    const auto sil = silhouette_vertices(mesh, view.camera);
    if (sil.empty() || view.points.empty()) continue;
    std::vector<Eigen::Vector2d> projected(sil.size());
    for (size_t i = 0; i < sil.size(); ++i) {
      const auto p = view.camera.project(mesh.vertices()[sil[i]]);
      projected[i] = Eigen::Vector2d(p.px, p.py);
    }
    for (const auto& c : view.points) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : projected) {
        best = std::min(best, (p - c).squaredNorm());
      }
      sum += std::sqrt(best);
      ++count;
    }
  }
  return count == 0 ? 0.0 : sum / double(count);
}

DeformResult deform_to_contours(const TriangleMesh& mesh,
                                const ContourConstraintSet& constraints,
                                const DeformOptions& options) {
  if (options.laplacian_weight < 0 || options.contour_weight < 0) {
    throw ValidationError("deformation weights must be non-negative");
  }

  const int n = int(mesh.vertices().size());
  const Eigen::SparseMatrix<double> L = uniform_laplacian(mesh);

  // Laplacian targets from the input mesh, per coordinate.
  Eigen::MatrixXd V(n, 3);
  for (int i = 0; i < n; ++i) V.row(i) = mesh.vertices()[i].transpose();
  const Eigen::MatrixXd LV = L * V;

  DeformResult result{mesh, {}, 0.0, 0.0};
  result.contour_residual_before = mean_contour_residual(mesh, constraints);

  // Unknown layout: columns [x0..xn, y0..yn, z0..zn].
  Eigen::VectorXd solution(3 * n);
  for (int c = 0; c < 3; ++c) solution.segment(c * n, n) = V.col(c);

  std::vector<Vec3> current = mesh.vertices();
  const double sqrt_lap = std::sqrt(options.laplacian_weight);
  const double sqrt_con = std::sqrt(options.contour_weight);

  for (int pass = 0; pass < std::max(1, options.correspondence_iterations);
       ++pass) {
    std::vector<Eigen::Triplet<double>> triplets;
    std::vector<double> rhs;
    int row = 0;

    // Laplacian preservation rows, one per vertex and coordinate.
    for (int c = 0; c < 3; ++c) {
      for (int k = 0; k < L.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(L, k); it; ++it) {
          triplets.emplace_back(row + it.row(), c * n + int(it.col()),
                                sqrt_lap * it.value());
        }
      }
      for (int i = 0; i < n; ++i) rhs.push_back(sqrt_lap * LV(i, c));
      row += n;
    }

    // Contour rows: each contour point pins the two in-plane camera
    // coordinates of its nearest projected silhouette vertex.
    result.skipped_views.clear();
    const TriangleMesh snapshot(current, mesh.triangles());
    for (size_t vi = 0; vi < constraints.views.size(); ++vi) {
      const auto& view = constraints.views[vi];
      const auto sil = silhouette_vertices(snapshot, view.camera);
      if (sil.empty()) {
        result.skipped_views.push_back(int(vi));
        continue;
      }
      std::vector<Eigen::Vector2d> projected(sil.size());
      for (size_t i = 0; i < sil.size(); ++i) {
        const auto p = view.camera.project(current[sil[i]]);
        projected[i] = Eigen::Vector2d(p.px, p.py);
      }
      const Mat3 r = view.camera.pose.rotation;
      const Vec3 e = view.camera.pose.translation;
      const double kappa = view.camera.kappa;
      for (const auto& cpt : view.points) {
        int best = -1;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < sil.size(); ++i) {
          const double d2 = (projected[i] - cpt).squaredNorm();
          if (d2 < best_d2 || (d2 == best_d2 && sil[i] < sil[best])) {
            best_d2 = d2;
            best = int(i);
          }
        }
        const int vtx = sil[best];
        // Camera-frame in-plane coordinates of the target pixel.
        const double tx =
            kappa * (cpt[0] + 0.5 - 0.5 * view.camera.width) + r.col(0).dot(e);
        const double ty =
            kappa * (cpt[1] + 0.5 - 0.5 * view.camera.height) + r.col(1).dot(e);
        for (int axis = 0; axis < 2; ++axis) {
          const Vec3 basis = r.col(axis);
          for (int c = 0; c < 3; ++c) {
            triplets.emplace_back(row, c * n + vtx, sqrt_con * basis[c]);
          }
          rhs.push_back(sqrt_con * (axis == 0 ? tx : ty));
          ++row;
        }
      }
    }

    Eigen::SparseMatrix<double> A(row, 3 * n);
    A.setFromTriplets(triplets.begin(), triplets.end());
    A.makeCompressed();
    const Eigen::VectorXd b = Eigen::Map<Eigen::VectorXd>(rhs.data(), row);

    Eigen::LeastSquaresConjugateGradient<Eigen::SparseMatrix<double>> solver;
    solver.setTolerance(options.solver_tolerance);
    solver.setMaxIterations(options.solver_max_iterations);
    solver.compute(A);
    solution = solver.solveWithGuess(b, solution);
    if (!solution.allFinite()) {
      throw NumericalError("contour deformation produced non-finite vertices");
    }

    for (int i = 0; i < n; ++i) {
      current[i] = Vec3(solution[i], solution[n + i], solution[2 * n + i]);
    }
  }

  result.mesh = TriangleMesh(current, mesh.triangles(),
                             mesh.has_vertex_normals()
                                 ? mesh.vertex_normals()
                                 : std::vector<Vec3>{});
  result.contour_residual_after =
      mean_contour_residual(result.mesh, constraints);
  return result;
}

}  // namespace mvf
