#include "fpvio/fusion/filter.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "fpvio/core/geometry.hpp"
#include "fpvio/imu/propagation.hpp"

namespace fpvio {

void predict(FilterState& state, MatX& covariance, const ImuSample& sample, double dt,
             const ImuNoiseParams& noise) {
  const auto [omega, accel] = correct_measurement(sample, state.imu.bw, state.imu.ba);
  covariance = propagate_covariance(covariance, state.imu, omega, accel, dt, noise);
  state.imu = propagate_state(state.imu, sample, dt, noise.gravity);
}

std::pair<Vec3, Quat> predict_measurement(const FilterState& s) {
  const Vec3 cam_in_world = s.imu.p + rotate_inverse(s.imu.q, s.p_ic);
  const Vec3 z_p = rotate(s.q_wv, cam_in_world) * s.lambda + s.p_wv;
  const Quat z_q = quat_mul(s.q_ic, quat_mul(s.imu.q, quat_conjugate(s.q_wv)));
  return {z_p, z_q};
}

namespace {

// Shared position/rotation blocks of ∂h/∂(error) for a pose (p, q) — used
// for both the current state and the clone.
struct PoseBlocks {
  Mat3 dzp_dp;      // ∂z_p/∂δp
  Mat3 dzp_dtheta;  // ∂z_p/∂δθ (pose rotation)
  Mat3 dzq_dtheta;  // ∂r_θ/∂δθ
};

PoseBlocks pose_blocks(const FilterState& s, const Vec3& p, const Quat& q) {
  PoseBlocks b;
  const Mat3 c_wv = quat_to_rot(s.q_wv);
  const Mat3 c_wi_t = quat_to_rot(q).transpose();
  b.dzp_dp = s.lambda * c_wv;
  b.dzp_dtheta = s.lambda * c_wv * c_wi_t * skew(s.p_ic);
  b.dzq_dtheta = quat_to_rot(s.q_ic);
  return b;
}

// Vision-state columns (λ, δθ_ic, Δp_wv, δθ_wv) for the absolute model at
// pose (p, q); sign = +1 for z(now), −1 when subtracting the clone term.
void fill_vision_columns(const FilterState& s, const Vec3& p, const Quat& q, double sign,
                         MatX& h) {
  const Mat3 c_wv = quat_to_rot(s.q_wv);
  const Vec3 u = p + rotate_inverse(q, s.p_ic);
  const Quat z_q = quat_mul(s.q_ic, quat_mul(q, quat_conjugate(s.q_wv)));

  h.block<3, 1>(0, kIdxLambda) += sign * c_wv * u;
  h.block<3, 3>(0, kIdxPwv) += sign * Mat3::Identity();
  h.block<3, 3>(0, kIdxThetaWv) += sign * (-s.lambda) * skew(c_wv * u);
  h.block<3, 3>(3, kIdxThetaIc) += sign * Mat3::Identity();
  h.block<3, 3>(3, kIdxThetaWv) += sign * (-quat_to_rot(z_q));
}

}  // namespace

MatX measurement_jacobian(const FilterState& s) {
  MatX h = MatX::Zero(6, s.error_dim());
  const PoseBlocks b = pose_blocks(s, s.imu.p, s.imu.q);
  h.block<3, 3>(0, kIdxPos) = b.dzp_dp;
  h.block<3, 3>(0, kIdxTheta) = b.dzp_dtheta;
  h.block<3, 3>(3, kIdxTheta) = b.dzq_dtheta;
  fill_vision_columns(s, s.imu.p, s.imu.q, 1.0, h);
  return h;
}

std::pair<Vec3, Quat> predict_relative_measurement(const FilterState& s) {
  if (!s.clone) throw std::runtime_error("relative update requires clone");
  FilterState at_clone = s;
  at_clone.imu.p = s.clone->p;
  at_clone.imu.q = s.clone->q;
  const auto [zp_now, zq_now] = predict_measurement(s);
  const auto [zp_k, zq_k] = predict_measurement(at_clone);
  return {zp_now - zp_k, quat_mul(zq_now, quat_conjugate(zq_k))};
}

MatX relative_measurement_jacobian(const FilterState& s) {
  if (!s.clone) throw std::runtime_error("relative update requires clone");
  MatX h = MatX::Zero(6, kErrDimClone);

  const PoseBlocks now = pose_blocks(s, s.imu.p, s.imu.q);
  h.block<3, 3>(0, kIdxPos) = now.dzp_dp;
  h.block<3, 3>(0, kIdxTheta) = now.dzp_dtheta;

  const PoseBlocks at_k = pose_blocks(s, s.clone->p, s.clone->q);
  h.block<3, 3>(0, kIdxClonePos) = -at_k.dzp_dp;
  h.block<3, 3>(0, kIdxCloneTheta) = -at_k.dzp_dtheta;

  // Rotation residual r_θ of z_Δq = z_q(now) ⊗ z_q(k)^-1:
  //   ∂r/∂δθ_now = C(q_ic); ∂r/∂δθ_k = −C(ẑ_Δq)·C(q_ic);
  //   δθ_ic enters as (I − C(ẑ_Δq)); drift rotation/translation cancel.
  const auto [zp_d, zq_d] = predict_relative_measurement(s);
  (void)zp_d;
  const Mat3 c_delta = quat_to_rot(zq_d);
  const Mat3 c_ic = quat_to_rot(s.q_ic);
  h.block<3, 3>(3, kIdxTheta) = c_ic;
  h.block<3, 3>(3, kIdxCloneTheta) = -c_delta * c_ic;
  h.block<3, 3>(3, kIdxThetaIc) = Mat3::Identity() - c_delta;

  // λ and drift-rotation columns of the position part.
  const Mat3 c_wv = quat_to_rot(s.q_wv);
  const Vec3 u_now = s.imu.p + rotate_inverse(s.imu.q, s.p_ic);
  const Vec3 u_k = s.clone->p + rotate_inverse(s.clone->q, s.p_ic);
  h.block<3, 1>(0, kIdxLambda) = c_wv * (u_now - u_k);
  h.block<3, 3>(0, kIdxThetaWv) = -s.lambda * skew(c_wv * (u_now - u_k));
  return h;
}

VisionMeasurement make_relative_measurement(const VisionMeasurement& at_clone,
                                            const VisionMeasurement& current) {
  VisionMeasurement out;
  out.t = current.t;
  out.z_p = current.z_p - at_clone.z_p;
  out.z_q = quat_mul(current.z_q, quat_conjugate(at_clone.z_q));
  // First-order noise mapping of the k-side terms through the delta.
  Mat6 transfer = Mat6::Zero();
  transfer.topLeftCorner<3, 3>() = -Mat3::Identity();
  transfer.bottomRightCorner<3, 3>() = -quat_to_rot(out.z_q);
  out.noise = current.noise + transfer * at_clone.noise * transfer.transpose();
  return out;
}

void clone_state(FilterState& state, MatX& covariance, double t) {
  if (state.clone) throw std::runtime_error("clone already pending");
  state.clone = PoseClone{state.imu.p, state.imu.q, t};

  MatX augmented = MatX::Zero(kErrDimClone, kErrDimClone);
  augmented.topLeftCorner(kErrDim, kErrDim) = covariance;
  MatX j = MatX::Zero(kCloneDim, kErrDim);  // clone rows copy the pose rows
  j.block<3, 3>(0, kIdxPos) = Mat3::Identity();
  j.block<3, 3>(3, kIdxTheta) = Mat3::Identity();
  augmented.bottomLeftCorner(kCloneDim, kErrDim) = j * covariance;
  augmented.topRightCorner(kErrDim, kCloneDim) =
      augmented.bottomLeftCorner(kCloneDim, kErrDim).transpose();
  augmented.bottomRightCorner(kCloneDim, kCloneDim) =
      j * covariance * j.transpose();
  covariance = 0.5 * (augmented + augmented.transpose());
}

void marginalize_clone(FilterState& state, MatX& covariance) {
  state.clone.reset();
  covariance = covariance.topLeftCorner(kErrDim, kErrDim).eval();
}

UpdateResult update(FilterState& state, MatX& covariance, const VisionMeasurement& z,
                    const UpdateConfig& config) {
  const bool relative = config.mode == UpdateMode::kRelative;
  if (relative && !state.clone) throw std::runtime_error("relative update requires clone");

  const int dim = state.error_dim();
  const FilterState prior = state;
  FilterState iterate = state;

  UpdateResult result;
  MatX h_final;
  MatX k_final;

  for (int j = 0; j < config.max_iterations; ++j) {
    const auto [zp_hat, zq_hat] =
        relative ? predict_relative_measurement(iterate) : predict_measurement(iterate);
    Vec6 residual;
    residual.head<3>() = z.z_p - zp_hat;
    residual.tail<3>() = quat_to_small_angle(quat_mul(z.z_q, quat_conjugate(zq_hat)));

    const MatX h =
        relative ? relative_measurement_jacobian(iterate) : measurement_jacobian(iterate);

    const Mat6 s_innov = h * covariance * h.transpose() + z.noise;
    Eigen::JacobiSVD<Mat6> svd(s_innov);
    const double cond =
        svd.singularValues()(0) / std::max(svd.singularValues()(5), 1e-300);
    if (cond > 1e12) throw std::runtime_error("innovation not invertible");
    const Mat6 s_inv = s_innov.inverse();

    if (j == 0) {
      result.nis = residual.dot(s_inv * residual);
      if (config.nis_gate && result.nis > config.nis_threshold) {
        result.rejected = true;
        return result;
      }
    }

    const MatX gain = covariance * h.transpose() * s_inv;
    const VecX prior_minus_iterate = state_difference(prior, iterate);
    const VecX step =
        prior_minus_iterate + gain * (residual - h * prior_minus_iterate);

    bool clamped = false;
    iterate = apply_correction(iterate, step, &clamped);
    result.lambda_clamped = result.lambda_clamped || clamped;
    result.iterations = j + 1;
    h_final = h;
    k_final = gain;
    if (step.norm() < config.step_tolerance) {
      result.converged = true;
      break;
    }
  }

  // Single Joseph-form covariance correction at the final linearization.
  const MatX i_kh = MatX::Identity(dim, dim) - k_final * h_final;
  covariance = i_kh * covariance * i_kh.transpose() +
               k_final * z.noise * k_final.transpose();
  covariance = 0.5 * (covariance + covariance.transpose()).eval();

  state = iterate;
  if (relative) marginalize_clone(state, covariance);
  return result;
}

}  // namespace fpvio
