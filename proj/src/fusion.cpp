#include "mvf/fusion.h"

#include <cmath>

#include <Eigen/IterativeLinearSolvers>

#include "mvf/errors.h"
#include "mvf/parallel.h"
#include "mvf/pointgen.h"

namespace mvf {

DepthIndex build_depth_index(const MapSet& m) {
  DepthIndex index;
  index.column.reserve(m.views.size());
  for (int v = 0; v < m.view_count(); ++v) {
    const ViewMaps& vm = m.views[v];
    Image<int> cols(vm.mask.width(), vm.mask.height(), -1);
    for (int y = 0; y < vm.mask.height(); ++y) {
      for (int x = 0; x < vm.mask.width(); ++x) {
        if (vm.mask.at(x, y)) {
          cols.at(x, y) = int(index.pixel.size());
          index.pixel.push_back({v, x, y});
        }
      }
    }
    index.column.push_back(std::move(cols));
  }
  return index;
}

Eigen::VectorXd gather_depths(const MapSet& m, const DepthIndex& index) {
  Eigen::VectorXd d(index.count());
  for (int i = 0; i < index.count(); ++i) {
    const auto [v, x, y] = index.pixel[i];
    d[i] = double(m.views[v].depth.at(x, y));
  }
  return d;
}

void scatter_depths(const Eigen::VectorXd& depths, const DepthIndex& index,
                    MapSet* m, bool clamp) {
  for (int i = 0; i < index.count(); ++i) {
    const auto [v, x, y] = index.pixel[i];
    double d = depths[i];
    if (clamp) d = std::clamp(d, -1.0, 1.0);
    m->views[v].depth.at(x, y) = float(d);
  }
}

TangentStencil tangent_stencil(const ForegroundMask& mask, int x, int y,
                               bool along_x) {
  TangentStencil s;
  const int dx = along_x ? 1 : 0;
  const int dy = along_x ? 0 : 1;
  const bool minus = mask.in_bounds(x - dx, y - dy) && mask.at(x - dx, y - dy);
  const bool plus = mask.in_bounds(x + dx, y + dy) && mask.at(x + dx, y + dy);
  if (!minus && !plus) return s;
  s.valid = true;
  if (minus && plus) {
    s.count = 2;
    s.px[0] = x - dx; s.py[0] = y - dy; s.coeff[0] = -0.5;
    s.px[1] = x + dx; s.py[1] = y + dy; s.coeff[1] = 0.5;
  } else if (plus) {
    s.count = 2;
    s.px[0] = x; s.py[0] = y; s.coeff[0] = -1.0;
    s.px[1] = x + dx; s.py[1] = y + dy; s.coeff[1] = 1.0;
  } else {
    s.count = 2;
    s.px[0] = x - dx; s.py[0] = y - dy; s.coeff[0] = -1.0;
    s.px[1] = x; s.py[1] = y; s.coeff[1] = 1.0;
  }
  return s;
}

std::pair<std::optional<Vec3>, std::optional<Vec3>> tangents(
    const DepthMap& depth, const ForegroundMask& mask, double kappa, int x,
    int y) {
  std::pair<std::optional<Vec3>, std::optional<Vec3>> out;
  const auto eval = [&](const TangentStencil& s) {
    double grad = 0.0;
    for (int k = 0; k < s.count; ++k) {
      grad += s.coeff[k] * double(depth.at(s.px[k], s.py[k]));
    }
    return grad;
  };
  const TangentStencil sx = tangent_stencil(mask, x, y, true);
  if (sx.valid) out.first = Vec3(kappa, 0.0, eval(sx));
  const TangentStencil sy = tangent_stencil(mask, x, y, false);
  if (sy.valid) out.second = Vec3(0.0, kappa, eval(sy));
  return out;
}

std::vector<Correspondence> build_correspondences(const MapSet& m,
                                                  const FusionConfig& config) {
  const double tau = config.resolved_occlusion_threshold(m.rig.kappa());
  const int v_count = m.view_count();

  std::vector<std::vector<Correspondence>> per_view(v_count);
  parallel_for(0, v_count, [&](int64_t v) {
    const OrthographicCamera& cam = m.rig.cameras[v];
    const ViewMaps& vm = m.views[v];
    auto& out = per_view[v];
    for (int y = 0; y < vm.mask.height(); ++y) {
      for (int x = 0; x < vm.mask.width(); ++x) {
        if (!vm.mask.at(x, y)) continue;
        const double d = double(vm.depth.at(x, y));
        // Point at depth 0 for this pixel; the depth contribution is
        // handled through alpha so beta stays exact for any d.
        const Vec3 base = cam.unproject(double(x), double(y), 0.0);
        const Eigen::Vector3f& nf = vm.normal.at(x, y);
        const Vec3 n_obj = cam.pose.rotation * Vec3(nf[0], nf[1], nf[2]);
        for (int u = 0; u < v_count; ++u) {
          if (u == int(v)) continue;
          const OrthographicCamera& dst = m.rig.cameras[u];
          const Vec3 z_dst = dst.view_axis();
          const double alpha = z_dst.dot(cam.view_axis());
          const double beta = z_dst.dot(base - dst.pose.translation);
          const Vec3 q = base + d * cam.view_axis();
          const auto proj = dst.project(q);
          const int px = int(std::lround(proj.px));
          const int py = int(std::lround(proj.py));
          if (!dst.pixel_in_bounds(px, py)) continue;
          if (!m.views[u].mask.at(px, py)) continue;
          const double projected_depth = alpha * d + beta;
          if (std::abs(double(m.views[u].depth.at(px, py)) - projected_depth) >=
              tau) {
            continue;
          }
          Correspondence c;
          c.src_view = int(v);
          c.sx = x;
          c.sy = y;
          c.dst_view = u;
          c.dx = px;
          c.dy = py;
          c.alpha = alpha;
          c.beta = beta;
          c.dst_normal = dst.pose.rotation.transpose() * n_obj;
          c.t_px[0] = px;
          c.t_py[0] = py;
          // Bilinear target cell around the continuous projection, used
          // when fully foreground; otherwise the rounded pixel stands.
          const int x0 = int(std::floor(proj.px));
          const int y0 = int(std::floor(proj.py));
          if (x0 >= 0 && x0 + 1 < dst.width && y0 >= 0 && y0 + 1 < dst.height &&
              m.views[u].mask.at(x0, y0) && m.views[u].mask.at(x0 + 1, y0) &&
              m.views[u].mask.at(x0, y0 + 1) &&
              m.views[u].mask.at(x0 + 1, y0 + 1)) {
            const double fx = proj.px - x0;
            const double fy = proj.py - y0;
            c.t_count = 4;
            c.t_px[0] = x0;     c.t_py[0] = y0;     c.t_w[0] = (1 - fx) * (1 - fy);
            c.t_px[1] = x0 + 1; c.t_py[1] = y0;     c.t_w[1] = fx * (1 - fy);
            c.t_px[2] = x0;     c.t_py[2] = y0 + 1; c.t_w[2] = (1 - fx) * fy;
            c.t_px[3] = x0 + 1; c.t_py[3] = y0 + 1; c.t_w[3] = fx * fy;
          }
          out.push_back(c);
        }
      }
    }
  });

  std::vector<Correspondence> all;
  size_t total = 0;
  for (const auto& pv : per_view) total += pv.size();
  all.reserve(total);
  for (const auto& pv : per_view) {
    all.insert(all.end(), pv.begin(), pv.end());
  }
  return all;
}

std::pair<MapSet, int> remove_outliers(const MapSet& m) {
  const int v_count = m.view_count();
  std::vector<std::vector<std::pair<int, int>>> culls(v_count);

  parallel_for(0, v_count, [&](int64_t v) {
    const OrthographicCamera& cam = m.rig.cameras[v];
    const ViewMaps& vm = m.views[v];
    for (int y = 0; y < vm.mask.height(); ++y) {
      for (int x = 0; x < vm.mask.width(); ++x) {
        if (!vm.mask.at(x, y)) continue;
        const Vec3 q =
            cam.unproject(double(x), double(y), double(vm.depth.at(x, y)));
        int in_bounds = 0;
        int background = 0;
        for (int u = 0; u < v_count; ++u) {
          if (u == int(v)) continue;
          const auto proj = m.rig.cameras[u].project(q);
          const int px = int(std::lround(proj.px));
          const int py = int(std::lround(proj.py));
          if (!m.rig.cameras[u].pixel_in_bounds(px, py)) continue;
          ++in_bounds;
          // Silhouette-rim projections round outward by up to half a
          // pixel; only a projection whose whole 3x3 neighborhood is
          // background counts as landing on background.
          bool any_foreground = false;
          for (int dy = -1; dy <= 1 && !any_foreground; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
              const int nx = px + dx, ny = py + dy;
              if (m.views[u].mask.in_bounds(nx, ny) &&
                  m.views[u].mask.at(nx, ny)) {
                any_foreground = true;
                break;
              }
            }
          }
          if (!any_foreground) ++background;
        }
        if (in_bounds > 0 && 2 * background > in_bounds) {
          culls[v].push_back({x, y});
        }
      }
    }
  });

  MapSet out = m;
  int removed = 0;
  for (int v = 0; v < v_count; ++v) {
    for (const auto& [x, y] : culls[v]) {
      out.views[v].mask.at(x, y) = 0;
      out.views[v].depth.at(x, y) = 0.0f;
      out.views[v].normal.at(x, y) = Eigen::Vector3f(0.0f, 0.0f, 1.0f);
      ++removed;
    }
  }
  return {std::move(out), removed};
}

namespace {

// Shared row enumeration for the energy, its gradient and the assembled
// system, so the three stay consistent by construction. Emits each
// residual as (row info, coefficient list over depth columns, constant)
// with the residual defined as sum(coeff * d) + constant, and weight w.
template <typename Emit>
void for_each_residual(const MapSet& m, const DepthIndex& index,
                       const std::vector<Correspondence>& corrs,
                       const FusionConfig& config, const Emit& emit) {
  const double kappa = m.rig.kappa();

  // Silhouette maps per view (derivatives are unreliable there).
  std::vector<Image<uint8_t>> silhouette(m.view_count());
  for (int v = 0; v < m.view_count(); ++v) {
    silhouette[v] = silhouette_pixels(m.views[v].mask);
  }

  int cols[5];
  double coeffs[5];

  // E_net: one row per foreground pixel, d - d_tilde.
  if (config.w1 > 0.0) {
    for (int i = 0; i < index.count(); ++i) {
      const auto [v, x, y] = index.pixel[i];
      cols[0] = i;
      coeffs[0] = 1.0;
      emit(RowInfo{RowKind::Net, v, x, y}, 1, cols, coeffs,
           -double(m.views[v].depth.at(x, y)), config.w1);
    }
  }

  // E_orth: tangent-normal rows at non-silhouette foreground pixels.
  if (config.w2 > 0.0) {
    for (int v = 0; v < m.view_count(); ++v) {
      const ViewMaps& vm = m.views[v];
      for (int y = 0; y < vm.mask.height(); ++y) {
        for (int x = 0; x < vm.mask.width(); ++x) {
          if (!vm.mask.at(x, y) || silhouette[v].at(x, y)) continue;
          const Eigen::Vector3f& nf = vm.normal.at(x, y);
          for (int axis = 0; axis < 2; ++axis) {
            const TangentStencil s =
                tangent_stencil(vm.mask, x, y, axis == 0);
            if (!s.valid) continue;
            const double n_inplane = axis == 0 ? double(nf[0]) : double(nf[1]);
            const double n_z = double(nf[2]);
            for (int k = 0; k < s.count; ++k) {
              cols[k] = index.at(v, s.px[k], s.py[k]);
              coeffs[k] = s.coeff[k] * n_z;
            }
            emit(RowInfo{axis == 0 ? RowKind::OrthX : RowKind::OrthY, v, x, y},
                 s.count, cols, coeffs, kappa * n_inplane, config.w2);
          }
        }
      }
    }
  }

  // E_cons: cross-view depth agreement and tangent-normal rows at the
  // target pixel, per frozen correspondence. Correspondences landing on
  // a silhouette pixel contribute nothing: the stored depth there is a
  // grazing sample whose half-pixel rounding error is unbounded, the
  // same unreliability that drops silhouette pixels from the tangent
  // terms.
  for (const Correspondence& c : corrs) {
    if (silhouette[c.dst_view].at(c.dx, c.dy)) continue;
    if (config.w3 > 0.0) {
      int n = 0;
      for (int k = 0; k < c.t_count; ++k) {
        cols[n] = index.at(c.dst_view, c.t_px[k], c.t_py[k]);
        coeffs[n] = c.t_w[k];
        ++n;
      }
      cols[n] = index.at(c.src_view, c.sx, c.sy);
      coeffs[n] = -c.alpha;
      ++n;
      emit(RowInfo{RowKind::ConsDepth, c.dst_view, c.dx, c.dy}, n, cols,
           coeffs, -c.beta, config.w3);
    }
    if (config.w4 > 0.0) {
      const ViewMaps& dst = m.views[c.dst_view];
      for (int axis = 0; axis < 2; ++axis) {
        const TangentStencil s =
            tangent_stencil(dst.mask, c.dx, c.dy, axis == 0);
        if (!s.valid) continue;
        const double n_inplane =
            axis == 0 ? c.dst_normal[0] : c.dst_normal[1];
        const double n_z = c.dst_normal[2];
        for (int k = 0; k < s.count; ++k) {
          cols[k] = index.at(c.dst_view, s.px[k], s.py[k]);
          coeffs[k] = s.coeff[k] * n_z;
        }
        emit(RowInfo{axis == 0 ? RowKind::ConsTanX : RowKind::ConsTanY,
                     c.dst_view, c.dx, c.dy},
             s.count, cols, coeffs, kappa * n_inplane, config.w4);
      }
    }
  }
}

}  // namespace

EnergyBreakdown fusion_energy(const MapSet& m, const Eigen::VectorXd& depths,
                              const DepthIndex& index,
                              const std::vector<Correspondence>& corrs,
                              const FusionConfig& config) {
  EnergyBreakdown e;
  for_each_residual(
      m, index, corrs, config,
      [&](const RowInfo& info, int n, const int* cols, const double* coeffs,
          double constant, double weight) {
        double r = constant;
        for (int k = 0; k < n; ++k) r += coeffs[k] * depths[cols[k]];
        const double term = weight * r * r;
        switch (info.kind) {
          case RowKind::Net: e.e_net += term; break;
          case RowKind::OrthX:
          case RowKind::OrthY: e.e_orth += term; break;
          default: e.e_cons += term; break;
        }
      });
  return e;
}

Eigen::VectorXd fusion_energy_gradient(const MapSet& m,
                                       const Eigen::VectorXd& depths,
                                       const DepthIndex& index,
                                       const std::vector<Correspondence>& corrs,
                                       const FusionConfig& config) {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(index.count());
  for_each_residual(
      m, index, corrs, config,
      [&](const RowInfo&, int n, const int* cols, const double* coeffs,
          double constant, double weight) {
        double r = constant;
        for (int k = 0; k < n; ++k) r += coeffs[k] * depths[cols[k]];
        for (int k = 0; k < n; ++k) {
          grad[cols[k]] += 2.0 * weight * r * coeffs[k];
        }
      });
  return grad;
}

FusionSystem assemble_fusion_system(const MapSet& m, const DepthIndex& index,
                                    const std::vector<Correspondence>& corrs,
                                    const FusionConfig& config) {
  FusionSystem system;
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<double> rhs;

  for_each_residual(
      m, index, corrs, config,
      [&](const RowInfo& info, int n, const int* cols, const double* coeffs,
          double constant, double weight) {
        const double scale = std::sqrt(weight);
        const int row = int(system.rows.size());
        for (int k = 0; k < n; ++k) {
          triplets.emplace_back(row, cols[k], scale * coeffs[k]);
        }
        rhs.push_back(-scale * constant);
        system.rows.push_back(info);
      });

  system.matrix.resize(int(system.rows.size()), index.count());
  system.matrix.setFromTriplets(triplets.begin(), triplets.end());
  system.matrix.makeCompressed();
  system.rhs = Eigen::Map<Eigen::VectorXd>(rhs.data(), rhs.size());
  return system;
}

FusionResult solve_fusion(const MapSet& m, const FusionConfig& config) {
  if (config.w1 < 0 || config.w2 < 0 || config.w3 < 0 || config.w4 < 0) {
    throw ValidationError("fusion weights must be non-negative");
  }
  if (config.outer_iterations < 1) {
    throw ValidationError("fusion needs at least one outer iteration");
  }

  FusionResult result;
  auto [work, removed] = remove_outliers(m);
  result.report.outliers_removed = removed;

  const DepthIndex index = build_depth_index(work);
  const int64_t fg_count = index.count();
  Eigen::VectorXd depths = gather_depths(work, index);

  // `work` keeps the (post-cull) network predictions for E_net;
  // `current` carries the iterate for correspondence building.
  MapSet current = work;

  for (int iter = 0; iter < config.outer_iterations; ++iter) {
    const std::vector<Correspondence> corrs =
        build_correspondences(current, config);

    FusionIterationStats stats;
    stats.correspondences = int64_t(corrs.size());
    stats.mean_correspondences_per_pixel =
        fg_count > 0 ? double(corrs.size()) / double(fg_count) : 0.0;
    stats.e_total_before =
        fusion_energy(work, depths, index, corrs, config).total();

    if (fg_count > 0) {
      const FusionSystem system =
          assemble_fusion_system(work, index, corrs, config);
      Eigen::LeastSquaresConjugateGradient<Eigen::SparseMatrix<double>> solver;
      solver.setTolerance(config.solver_tolerance);
      solver.setMaxIterations(config.solver_max_iterations);
      solver.compute(system.matrix);
      depths = solver.solveWithGuess(system.rhs, depths);
      if (!depths.allFinite()) {
        throw NumericalError("fusion solve produced non-finite depths");
      }
      if (solver.info() == Eigen::NoConvergence) {
        result.report.solver_warning = true;
      }
      stats.solver_relative_residual = solver.error();
      stats.solver_iterations = int(solver.iterations());
    }

    const EnergyBreakdown after =
        fusion_energy(work, depths, index, corrs, config);
    stats.e_net = after.e_net;
    stats.e_orth = after.e_orth;
    stats.e_cons = after.e_cons;
    stats.e_total = after.total();
    result.report.iterations.push_back(stats);

    scatter_depths(depths, index, &current, /*clamp=*/false);

    if (config.energy_exit_threshold > 0.0 &&
        result.report.iterations.size() >= 2) {
      const auto& it = result.report.iterations;
      const double prev = it[it.size() - 2].e_total;
      const double rel = std::abs(prev - stats.e_total) /
                         std::max(std::abs(prev), 1e-30);
      if (rel < config.energy_exit_threshold) break;
    }
  }

  scatter_depths(depths, index, &current, /*clamp=*/true);
  result.fused = std::move(current);
  result.cloud = concatenate_points(generate_points(result.fused));
  return result;
}

}  // namespace mvf
