#pragma once

#include <vector>

#include "mvf/maps.h"
#include "mvf/pointgen.h"

namespace mvf {

struct IcpParams {
  int max_iterations = 30;
  double rejection_distance = 4.0 * 2.0 / 256.0;  // 4 pixels at 256^2
  double rms_change_threshold = 1e-6;

  static IcpParams defaults_for(double kappa) {
    IcpParams p;
    p.rejection_distance = 4.0 * kappa;
    return p;
  }
};

struct IcpIterationStats {
  int correspondences = 0;
  double rms_before_fit = 0.0;
  double rms_after_fit = 0.0;
};

struct IcpResult {
  RigidTransform transform;  // maps source points onto the target
  double rms = 0.0;          // over the final accepted correspondences
  bool zero_correspondences = false;
  std::vector<IcpIterationStats> iterations;
};

// Point-to-point ICP: nearest-neighbor correspondences (rejected beyond
// the rejection distance), closed-form rigid fit via the cross-covariance
// SVD with a det = +1 reflection guard. Stops at max_iterations or when a
// fit fails to improve the RMS by the change threshold (such a fit is
// discarded, so consistent inputs are an exact fixed point). Throws
// NumericalError when the source points have rank < 2 spread.
IcpResult icp(const std::vector<Vec3>& source, const std::vector<Vec3>& target,
              const IcpParams& params);

struct AlignResult {
  std::vector<RigidTransform> transforms;  // one per view, view 0 = identity
  std::vector<int> zero_correspondence_views;
};

// Mutual alignment of per-view point sets: view 0 fixes the gauge; each
// round-robin sweep aligns every other view against the union of the
// remaining views' current points. Deterministic.
AlignResult align_rig(const std::vector<PointSet>& sets,
                      const IcpParams& params, int sweeps = 2);

// Composes per-view corrections onto the rig camera poses, so points
// regenerated from the MapSet land at the aligned positions.
void apply_alignment(MapSet* m, const std::vector<RigidTransform>& transforms);

}  // namespace mvf
