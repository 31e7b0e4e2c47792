#pragma once

#include <vector>

#include <Eigen/SparseCore>

#include "mvf/camera.h"
#include "mvf/mesh.h"

namespace mvf {

// Per-view soft 2D targets: ordered contour points in pixel coordinates
// under that view's camera.
struct ContourViewConstraint {
  OrthographicCamera camera;
  std::vector<Eigen::Vector2d> points;
};

struct ContourConstraintSet {
  std::vector<ContourViewConstraint> views;
};

// Uniform graph Laplacian: row i = v_i - mean of its 1-ring neighbors.
// Throws when a vertex has no neighbors.
Eigen::SparseMatrix<double> uniform_laplacian(const TriangleMesh& mesh);

// Vertices on the apparent outline under the view: vertices adjacent to
// at least one front- and one back-facing triangle, plus boundary
// vertices (edges with a single incident triangle).
std::vector<int> silhouette_vertices(const TriangleMesh& mesh,
                                     const OrthographicCamera& camera);

struct DeformOptions {
  double laplacian_weight = 1.0;
  double contour_weight = 0.5;
  // Re-run the contour->vertex correspondence search this many times.
  int correspondence_iterations = 1;
  double solver_tolerance = 1e-10;
  int solver_max_iterations = 4000;
};

struct DeformResult {
  TriangleMesh mesh;
  std::vector<int> skipped_views;   // views without silhouette vertices
  double contour_residual_before = 0.0;  // mean pixel distance
  double contour_residual_after = 0.0;
};

// Moves vertices so that projected silhouette vertices approach the
// contour points (each contour point claims its nearest projected
// silhouette vertex; only the two in-plane camera coordinates are
// constrained) while surface Laplacians are preserved. Connectivity is
// untouched. Deterministic.
DeformResult deform_to_contours(const TriangleMesh& mesh,
                                const ContourConstraintSet& constraints,
                                const DeformOptions& options = {});

// Mean pixel distance from each contour point to the nearest projected
// silhouette vertex (the quantity the deformation reduces).
double mean_contour_residual(const TriangleMesh& mesh,
                             const ContourConstraintSet& constraints);

}  // namespace mvf
