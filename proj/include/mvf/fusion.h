#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "mvf/maps.h"
#include "mvf/mesh.h"

namespace mvf {

struct FusionConfig {
  double w1 = 1.0;  // network prediction term
  double w2 = 1.0;  // tangent/normal orthogonality term
  double w3 = 0.3;  // cross-view depth consistency
  double w4 = 0.3;  // cross-view tangent/normal consistency

  // Occlusion slack for the correspondence depth test; <= 0 resolves to
  // 4 * kappa of the rig at hand (4 pixels of depth).
  double occlusion_threshold = 0.0;

  int outer_iterations = 5;
  double solver_tolerance = 1e-8;
  int solver_max_iterations = 2000;

  // Early exit when the relative total-energy change between consecutive
  // outer iterations drops below this; 0 disables.
  double energy_exit_threshold = 1e-4;

  double resolved_occlusion_threshold(double kappa) const {
    return occlusion_threshold > 0.0 ? occlusion_threshold : 4.0 * kappa;
  }

  static FusionConfig defaults_for(double kappa) {
    FusionConfig c;
    c.occlusion_threshold = 4.0 * kappa;
    return c;
  }
};

// Accepted projection of a source foreground pixel into another view.
// The source point's depth seen from the target view is affine in the
// source pixel depth: d_dst(q) = alpha * d_src + beta, cached here along
// with the source normal rotated into the target camera frame.
//
// The depth-agreement rows compare against the target depth sampled at
// the continuous projection (bilinear over the 4 surrounding foreground
// pixels) whenever that cell is fully foreground and in bounds; rounded
// targets leave an irreducible half-pixel times surface-slope residual
// that clean data cannot satisfy. The cell is cached as up to 4
// (pixel, weight) samples; t_count == 1 marks the rounded fallback.
struct Correspondence {
  int src_view, sx, sy;
  int dst_view, dx, dy;  // rounded target pixel (occlusion test, tangents)
  double alpha, beta;
  Vec3 dst_normal;
  int t_count = 1;
  int t_px[4] = {0, 0, 0, 0};
  int t_py[4] = {0, 0, 0, 0};
  double t_w[4] = {1.0, 0.0, 0.0, 0.0};
};

// Column assignment for every foreground pixel, in (view, row, column)
// scan order.
struct DepthIndex {
  std::vector<Image<int>> column;                // -1 = background
  std::vector<std::array<int, 3>> pixel;         // column -> (view, x, y)

  int count() const { return int(pixel.size()); }
  int at(int view, int x, int y) const { return column[view].at(x, y); }
};

DepthIndex build_depth_index(const MapSet& m);
Eigen::VectorXd gather_depths(const MapSet& m, const DepthIndex& index);
// Writes depths back into float maps; clamps to [-1, 1] when requested.
void scatter_depths(const Eigen::VectorXd& depths, const DepthIndex& index,
                    MapSet* m, bool clamp);

// First-order depth derivative stencil along one image axis. At most two
// pixels carry coefficients: central differences over the 3x3
// neighborhood, one-sided when exactly one side is background, invalid
// when both sides are.
struct TangentStencil {
  bool valid = false;
  int count = 0;
  int px[2], py[2];
  double coeff[2];
};

TangentStencil tangent_stencil(const ForegroundMask& mask, int x, int y,
                               bool along_x);

// Surface tangents t_x = (kappa, 0, dd/dx), t_y = (0, kappa, dd/dy) at a
// foreground pixel, in the view's camera frame; nullopt per direction
// when both neighbors are background.
std::pair<std::optional<Vec3>, std::optional<Vec3>> tangents(
    const DepthMap& depth, const ForegroundMask& mask, double kappa, int x,
    int y);

// Projects every foreground pixel's point into all other views; accepts
// in-bounds foreground targets whose stored depth agrees with the
// projected depth within the occlusion threshold. Deterministic order:
// source view, then scan order, then target view.
std::vector<Correspondence> build_correspondences(const MapSet& m,
                                                  const FusionConfig& config);

// Culls foreground pixels whose points land on background pixels in the
// majority of the other views where they project in bounds. Single pass;
// decisions are taken against the input masks.
std::pair<MapSet, int> remove_outliers(const MapSet& m);

struct EnergyBreakdown {
  double e_net = 0.0;
  double e_orth = 0.0;
  double e_cons = 0.0;
  double total() const { return e_net + e_orth + e_cons; }
};

// Direct evaluation of the fusion energy for a depth assignment, with
// correspondences frozen. `m` supplies masks, predicted depths and
// normals; `depths` supplies the assignment being evaluated.
EnergyBreakdown fusion_energy(const MapSet& m, const Eigen::VectorXd& depths,
                              const DepthIndex& index,
                              const std::vector<Correspondence>& corrs,
                              const FusionConfig& config);

// Gradient of the same energy (for verification against finite
// differences; the solver itself works on the assembled system).
Eigen::VectorXd fusion_energy_gradient(const MapSet& m,
                                       const Eigen::VectorXd& depths,
                                       const DepthIndex& index,
                                       const std::vector<Correspondence>& corrs,
                                       const FusionConfig& config);

enum class RowKind : uint8_t { Net, OrthX, OrthY, ConsDepth, ConsTanX, ConsTanY };

struct RowInfo {
  RowKind kind;
  int view;  // the view owning the row's stencil/pixel
  int x, y;
};

// Sparse least-squares form of the energy: total = ||A d - b||^2 for the
// frozen correspondence set. Rows are scaled by sqrt(w). Assembly is
// deterministic: identical inputs produce identical matrices.
struct FusionSystem {
  Eigen::SparseMatrix<double> matrix;  // row-major construction, CSC storage
  Eigen::VectorXd rhs;
  std::vector<RowInfo> rows;
};

FusionSystem assemble_fusion_system(const MapSet& m, const DepthIndex& index,
                                    const std::vector<Correspondence>& corrs,
                                    const FusionConfig& config);

struct FusionIterationStats {
  double e_net = 0.0;
  double e_orth = 0.0;
  double e_cons = 0.0;
  double e_total = 0.0;         // after the solve, frozen correspondences
  double e_total_before = 0.0;  // before the solve, same correspondences
  int64_t correspondences = 0;
  double mean_correspondences_per_pixel = 0.0;
  double solver_relative_residual = 0.0;
  int solver_iterations = 0;
};

struct FusionReport {
  int outliers_removed = 0;
  bool solver_warning = false;  // a solve hit its iteration cap
  std::vector<FusionIterationStats> iterations;
};

struct FusionResult {
  MapSet fused;
  OrientedPointCloud cloud;
  FusionReport report;
};

// The outer loop: outlier cull, then repeatedly freeze correspondences,
// solve the sparse linear least-squares problem in all foreground depths
// (warm-started, so the frozen-correspondence energy never increases),
// write depths back and rebuild correspondences. Throws NumericalError
// if the solution goes non-finite.
FusionResult solve_fusion(const MapSet& m, const FusionConfig& config);

}  // namespace mvf
