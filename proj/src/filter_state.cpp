#include "fpvio/fusion/state.hpp"

#include <stdexcept>

#include "fpvio/core/geometry.hpp"

namespace fpvio {

FilterState apply_correction(const FilterState& state, const VecX& dx, bool* lambda_clamped) {
  if (dx.size() != state.error_dim())
    throw std::invalid_argument("correction dimension mismatch");

  FilterState out = state;
  out.imu.p += dx.segment<3>(kIdxPos);
  out.imu.v += dx.segment<3>(kIdxVel);
  out.imu.q = quat_mul(small_angle_to_quat(dx.segment<3>(kIdxTheta)), state.imu.q);
  out.imu.bw += dx.segment<3>(kIdxBw);
  out.imu.ba += dx.segment<3>(kIdxBa);
  out.lambda += dx(kIdxLambda);
  if (lambda_clamped) *lambda_clamped = false;
  if (out.lambda <= 0.0) {
    out.lambda = 1e-6;
    if (lambda_clamped) *lambda_clamped = true;
  }
  out.q_ic = quat_mul(small_angle_to_quat(dx.segment<3>(kIdxThetaIc)), state.q_ic);
  out.p_wv += dx.segment<3>(kIdxPwv);
  out.q_wv = quat_mul(small_angle_to_quat(dx.segment<3>(kIdxThetaWv)), state.q_wv);
  if (state.clone) {
    out.clone->p += dx.segment<3>(kIdxClonePos);
    out.clone->q = quat_mul(small_angle_to_quat(dx.segment<3>(kIdxCloneTheta)),
                            state.clone->q);
  }
  return out;
}

VecX state_difference(const FilterState& a, const FilterState& b) {
  if (a.clone.has_value() != b.clone.has_value())
    throw std::invalid_argument("clone presence mismatch");

  VecX dx = VecX::Zero(a.error_dim());
  dx.segment<3>(kIdxPos) = a.imu.p - b.imu.p;
  dx.segment<3>(kIdxVel) = a.imu.v - b.imu.v;
  dx.segment<3>(kIdxTheta) =
      quat_to_small_angle(quat_mul(a.imu.q, quat_conjugate(b.imu.q)));
  dx.segment<3>(kIdxBw) = a.imu.bw - b.imu.bw;
  dx.segment<3>(kIdxBa) = a.imu.ba - b.imu.ba;
  dx(kIdxLambda) = a.lambda - b.lambda;
  dx.segment<3>(kIdxThetaIc) =
      quat_to_small_angle(quat_mul(a.q_ic, quat_conjugate(b.q_ic)));
  dx.segment<3>(kIdxPwv) = a.p_wv - b.p_wv;
  dx.segment<3>(kIdxThetaWv) =
      quat_to_small_angle(quat_mul(a.q_wv, quat_conjugate(b.q_wv)));
  if (a.clone) {
    dx.segment<3>(kIdxClonePos) = a.clone->p - b.clone->p;
    dx.segment<3>(kIdxCloneTheta) =
        quat_to_small_angle(quat_mul(a.clone->q, quat_conjugate(b.clone->q)));
  }
  return dx;
}

}  // namespace fpvio
