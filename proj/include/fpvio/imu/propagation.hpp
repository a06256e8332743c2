#pragma once

#include <utility>

#include "fpvio/imu/types.hpp"

namespace fpvio {

/// Bias-corrected body rates and specific force. White-noise terms are
/// zero-mean and enter the covariance only.
std::pair<Vec3, Vec3> correct_measurement(const ImuSample& sample, const Vec3& bw,
                                          const Vec3& ba);

/**
 * Nominal-state integration over one zero-order-hold interval:
 * ṗ = v, v̇ = C^T(q)·a − g, q̇ = ½Ω(ω)q. Midpoint rule for p/v with the
 * attitude evaluated at the exact half-step quaternion; the quaternion
 * itself integrates by the exact exponential of ω·dt. Biases constant.
 *
 * Throws "non-positive step" for dt ≤ 0.
 */
ImuState propagate_state(const ImuState& state, const ImuSample& sample, double dt,
                         const Vec3& gravity);

/**
 * Error-state covariance propagation P ← Φ P Φ^T + Q_d, Φ = I + F·dt + ½F²dt²,
 * trapezoidal Q_d. Error-state block order (31 columns with an active clone):
 *
 *   [δp 0:3 | δv 3:6 | δθ_w^i 6:9 | δb_ω 9:12 | δb_a 12:15 |
 *    Δλ 15 | δθ_i^c 16:19 | Δp_w^v 19:22 | δθ_w^v 22:25 | clone δp, δθ 25:31]
 *
 * Rotation errors are left-multiplicative: q = small_angle_to_quat(δθ) ⊗ q̂,
 * biases δb = b − b̂. Under these conventions
 *   δṗ = δv,  δv̇ = C^T⌊a⌋δθ − C^Tδb_a,  δθ̇ = −⌊ω⌋δθ + δb_ω,
 * and all vision/clone rows are zero dynamics.
 *
 * Throws "covariance corrupted" for clearly indefinite input.
 */
MatX propagate_covariance(const MatX& P, const ImuState& state, const Vec3& omega,
                          const Vec3& accel, double dt, const ImuNoiseParams& noise);

/// 15×15 IMU error-state Jacobian F (continuous time), as used above.
Eigen::Matrix<double, 15, 15> imu_error_jacobian(const ImuState& state, const Vec3& omega,
                                                 const Vec3& accel);

// Error-state block indices, shared across the filter.
inline constexpr int kIdxPos = 0;
inline constexpr int kIdxVel = 3;
inline constexpr int kIdxTheta = 6;
inline constexpr int kIdxBw = 9;
inline constexpr int kIdxBa = 12;
inline constexpr int kImuErrDim = 15;
inline constexpr int kIdxLambda = 15;
inline constexpr int kIdxThetaIc = 16;
inline constexpr int kIdxPwv = 19;
inline constexpr int kIdxThetaWv = 22;
inline constexpr int kErrDim = 25;
inline constexpr int kIdxClonePos = 25;
inline constexpr int kIdxCloneTheta = 28;
inline constexpr int kCloneDim = 6;
inline constexpr int kErrDimClone = 31;

}  // namespace fpvio
