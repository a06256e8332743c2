#pragma once

#include <utility>

#include "fpvio/fusion/state.hpp"

namespace fpvio {

/// One monocular pose measurement with its 6x6 noise covariance over
/// [δp; δθ] (left-multiplicative small-angle on the quaternion part).
struct VisionMeasurement {
  double t = 0.0;
  Vec3 z_p = Vec3::Zero();
  Quat z_q;
  Mat6 noise = Mat6::Identity();
};

enum class UpdateMode { kAbsolute, kRelative };

struct UpdateConfig {
  UpdateMode mode = UpdateMode::kAbsolute;
  int max_iterations = 5;
  double step_tolerance = 1e-6;
  bool nis_gate = false;
  double nis_threshold = 22.457744484837054;  // χ²₆(0.999)
};

struct UpdateResult {
  int iterations = 0;
  bool converged = false;
  bool rejected = false;       // NIS gate fired; state/covariance untouched
  bool lambda_clamped = false;
  double nis = 0.0;            // first-iterate normalized innovation squared
};

/// IMU prediction: nominal propagation plus covariance; vision states and
/// any pending clone are static (their covariance evolves through Φ).
void predict(FilterState& state, MatX& covariance, const ImuSample& sample, double dt,
             const ImuNoiseParams& noise);

/// Measurement model: ẑ_p = C(q_w^v)(p_w^i + C^T(q_w^i)p_i^c)·λ + p_w^v,
/// ẑ_q = q_i^c ⊗ q_w^i ⊗ (q_w^v)^-1.
std::pair<Vec3, Quat> predict_measurement(const FilterState& state);

/// Analytic Jacobian of the residual [z_p − ẑ_p; small_angle(z_q ⊗ ẑ_q^-1)]
/// w.r.t. the error state; 6×25, or 6×31 with zero clone columns when a
/// clone is pending (absolute-mode layout).
MatX measurement_jacobian(const FilterState& state);

/// Relative (delta) measurement between the pending clone at time k and the
/// current state: ẑ_Δp = ẑ_p(now) − ẑ_p(clone), ẑ_Δq = ẑ_q(now) ⊗ ẑ_q(clone)^-1.
std::pair<Vec3, Quat> predict_relative_measurement(const FilterState& state);

/// Analytic Jacobian of the relative residual, 6×31 (requires a clone).
MatX relative_measurement_jacobian(const FilterState& state);

/// Builds the delta measurement z_{k,k+m} from two consecutive absolute
/// measurements, combining their noises to first order.
VisionMeasurement make_relative_measurement(const VisionMeasurement& at_clone,
                                            const VisionMeasurement& current);

/// Stochastic cloning of (p_w^i, q_w^i); covariance rows/blocks duplicated.
/// Throws "clone already pending".
void clone_state(FilterState& state, MatX& covariance, double t);

/// Drops the clone block (inverse of augmentation).
void marginalize_clone(FilterState& state, MatX& covariance);

/**
 * Iterated EKF update (Alg.-style): relinearizes residual and Jacobian at
 * each iterate with the prior-restoring correction
 * x_{j+1} = x̂ ⊞ (d_j + K_j(r_j − H_j d_j)), d_j = x̂ ⊟ x_j, and applies one
 * Joseph-form covariance correction at the final linearization. Relative
 * mode consumes a delta measurement (see make_relative_measurement), uses
 * the clone columns, and marginalizes the clone afterwards.
 *
 * Throws "relative update requires clone" and "innovation not invertible".
 */
UpdateResult update(FilterState& state, MatX& covariance, const VisionMeasurement& z,
                    const UpdateConfig& config);

}  // namespace fpvio
