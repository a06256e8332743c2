#pragma once

#include <vector>

#include "fpvio/fpsp/frame.hpp"
#include "fpvio/vo/types.hpp"

namespace fpvio {

/// One 3D-2D correspondence for pose optimization.
struct PoseObservation {
  Vec3 point = Vec3::Zero();  // vision frame
  Vec2 pixel = Vec2::Zero();
};

struct PoseOptimizerOptions {
  int max_iterations = 10;
  double step_tolerance = 1e-8;
  double huber_delta_px = 1.5;
};

/**
 * Gauss-Newton over the 6-dim local parametrization of T_v^c (right-
 * multiplicative steps), minimizing ½ Σ ρ(‖u_i − π(T·p_i)‖²) with a Huber
 * loss. Steps that would increase the cost are rejected by backtracking.
 *
 * Throws std::invalid_argument("underdetermined") below 6 matches and
 * std::runtime_error("diverged") after 3 consecutive non-improving
 * iterations.
 */
VoPose estimate_pose(const std::vector<PoseObservation>& matches, const VoPose& initial,
                     const PinholeIntrinsics& intrinsics,
                     const PoseOptimizerOptions& opts = {});

/**
 * 6x6 covariance of the optimized pose in measurement-noise coordinates
 * [δp additive on p_v^c; δθ left-multiplicative on q_v^c]: Huber-weighted
 * Σ = σ̂²(JᵀJ)⁻¹ with σ̂² = cost/(2n−6).
 *
 * Throws std::runtime_error("rank deficient") when cond(JᵀJ) > 1e12.
 */
PoseCovariance pose_covariance(const std::vector<PoseObservation>& matches,
                               const VoPose& optimized, const PinholeIntrinsics& intrinsics,
                               const PoseOptimizerOptions& opts = {});

/// Jacobian of the projection u = π(C(q)(X − p)) w.r.t. [δp; δθ] in the
/// measurement coordinates above (the covariance parametrization).
Eigen::Matrix<double, 2, 6> reprojection_jacobian(const Vec3& point, const VoPose& pose,
                                                  const PinholeIntrinsics& intrinsics);

/// Total Huber cost Σ ρ(‖e_i‖²) at a pose.
double reprojection_cost(const std::vector<PoseObservation>& matches, const VoPose& pose,
                         const PinholeIntrinsics& intrinsics, double huber_delta_px);

}  // namespace fpvio
