#pragma once

#include <utility>
#include <vector>

#include "fpvio/core/types.hpp"

namespace fpvio {

/// Timestamped pose sequence (strictly increasing t).
struct Trajectory {
  std::vector<std::pair<double, Pose>> samples;
};

struct Sim3 {
  double scale = 1.0;
  RotationMatrix3 rotation = RotationMatrix3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& x) const { return scale * rotation * x + translation; }
};

struct AteReport {
  double rmse = 0.0;
  double median = 0.0;
  int n_pairs = 0;
  Sim3 alignment;
};

/**
 * Nearest-timestamp association, one-to-one, unmatched estimates dropped.
 * When two estimates prefer the same reference, the smaller |dt| wins.
 * Throws "no overlap" when no pair exists within max_dt.
 */
std::vector<std::pair<int, int>> associate(const Trajectory& est, const Trajectory& ref,
                                           double max_dt = 0.002);

/**
 * Closed-form least-squares similarity (Umeyama): minimizes
 * Σ‖ref_i − (s·R·est_i + t)‖² over the associated pairs; s > 0.
 * Throws "degenerate geometry" for < 3 pairs or (near-)collinear geometry.
 */
Sim3 align_sim3(const Trajectory& est, const Trajectory& ref,
                const std::vector<std::pair<int, int>>& pairs);

/// Translational ATE under a fixed alignment: rmse = sqrt(mean e²),
/// median = exact median (mean of the middle two when even).
AteReport compute_ate(const Trajectory& est, const Trajectory& ref,
                      const std::vector<std::pair<int, int>>& pairs, const Sim3& alignment);

/// Convenience: associate → align → ATE.
AteReport evaluate_ate(const Trajectory& est, const Trajectory& ref, double max_dt = 0.002);

}  // namespace fpvio
