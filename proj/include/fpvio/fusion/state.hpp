#pragma once

#include <optional>

#include "fpvio/core/types.hpp"
#include "fpvio/imu/propagation.hpp"
#include "fpvio/imu/types.hpp"

namespace fpvio {

/// Pose snapshot kept by stochastic cloning (state at measurement time k).
struct PoseClone {
  Vec3 p = Vec3::Zero();
  Quat q;
  double t = 0.0;
};

/**
 * Full fused state: the 16-element inertial state plus the vision-state
 * extension — monocular scale λ, camera-IMU rotation q_i^c, and the
 * world-to-vision drift pose (p_w^v, q_w^v). The camera-IMU translation
 * p_i^c is a fixed calibrated extrinsic, not estimated.
 *
 * The error-state layout over these fields is the 25-dim vector documented
 * at propagate_covariance, plus a 6-dim clone block when one is pending.
 * Rotation errors are left-multiplicative small angles; λ is additive.
 */
struct FilterState {
  ImuState imu;
  double lambda = 1.0;
  Quat q_ic;
  Vec3 p_ic = Vec3(0.006, 0.04, 0.07);
  Vec3 p_wv = Vec3::Zero();
  Quat q_wv;
  std::optional<PoseClone> clone;

  int error_dim() const { return clone ? kErrDimClone : kErrDim; }
};

/// Error-state injection x ⊞ dx. Quaternions correct multiplicatively,
/// everything else additively. λ is clamped at 1e-6 (never non-positive);
/// *lambda_clamped reports when that fires.
FilterState apply_correction(const FilterState& state, const VecX& dx,
                             bool* lambda_clamped = nullptr);

/// Error-state difference a ⊟ b (the dx with a = b ⊞ dx to first order).
VecX state_difference(const FilterState& a, const FilterState& b);

}  // namespace fpvio
