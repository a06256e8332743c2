#include "fpvio/imu/propagation.hpp"

#include <stdexcept>

#include <Eigen/Cholesky>

#include "fpvio/core/geometry.hpp"

namespace fpvio {

std::pair<Vec3, Vec3> correct_measurement(const ImuSample& sample, const Vec3& bw,
                                          const Vec3& ba) {
  return {sample.omega_meas - bw, sample.accel_meas - ba};
}

ImuState propagate_state(const ImuState& state, const ImuSample& sample, double dt,
                         const Vec3& gravity) {
  if (dt <= 0.0) throw std::invalid_argument("non-positive step");
  const auto [omega, accel] = correct_measurement(sample, state.bw, state.ba);

  const Quat q_half = quat_mul(small_angle_to_quat(-0.5 * dt * omega), state.q);
  const Quat q_full = quat_mul(small_angle_to_quat(-dt * omega), state.q);

  const Vec3 acc_world = rotate_inverse(q_half, accel) - gravity;

  ImuState out = state;
  out.p = state.p + state.v * dt + 0.5 * acc_world * dt * dt;
  out.v = state.v + acc_world * dt;
  out.q = q_full;
  return out;
}

Eigen::Matrix<double, 15, 15> imu_error_jacobian(const ImuState& state, const Vec3& omega,
                                                 const Vec3& accel) {
  Eigen::Matrix<double, 15, 15> f = Eigen::Matrix<double, 15, 15>::Zero();
  const Mat3 c_t = quat_to_rot(state.q).transpose();
  f.block<3, 3>(kIdxPos, kIdxVel) = Mat3::Identity();
  f.block<3, 3>(kIdxVel, kIdxTheta) = c_t * skew(accel);
  f.block<3, 3>(kIdxVel, kIdxBa) = -c_t;
  f.block<3, 3>(kIdxTheta, kIdxTheta) = -skew(omega);
  f.block<3, 3>(kIdxTheta, kIdxBw) = Mat3::Identity();
  return f;
}

MatX propagate_covariance(const MatX& P, const ImuState& state, const Vec3& omega,
                          const Vec3& accel, double dt, const ImuNoiseParams& noise) {
  if (dt <= 0.0) throw std::invalid_argument("non-positive step");
  const int dim = static_cast<int>(P.rows());
  if (P.cols() != dim || (dim != kErrDim && dim != kErrDimClone))
    throw std::invalid_argument("covariance dimension");

  // Cheap indefiniteness gate; full eigen checks live in the tests.
  const double scale = std::max(1.0, P.cwiseAbs().maxCoeff());
  if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw std::runtime_error("covariance corrupted");
  Eigen::LDLT<MatX> ldlt(0.5 * (P + P.transpose()));
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() < -1e-6 * scale)
    throw std::runtime_error("covariance corrupted");

  const Eigen::Matrix<double, 15, 15> f = imu_error_jacobian(state, omega, accel);
  const Eigen::Matrix<double, 15, 15> f_dt = f * dt;
  const Eigen::Matrix<double, 15, 15> phi =
      Eigen::Matrix<double, 15, 15>::Identity() + f_dt + 0.5 * f_dt * f_dt;

  Eigen::Matrix<double, 15, 15> qc = Eigen::Matrix<double, 15, 15>::Zero();
  qc.block<3, 3>(kIdxVel, kIdxVel) = noise.sigma_a * noise.sigma_a * Mat3::Identity();
  qc.block<3, 3>(kIdxTheta, kIdxTheta) = noise.sigma_w * noise.sigma_w * Mat3::Identity();
  qc.block<3, 3>(kIdxBw, kIdxBw) = noise.sigma_bw * noise.sigma_bw * Mat3::Identity();
  qc.block<3, 3>(kIdxBa, kIdxBa) = noise.sigma_ba * noise.sigma_ba * Mat3::Identity();
  const Eigen::Matrix<double, 15, 15> qd =
      0.5 * dt * (phi * qc * phi.transpose() + qc);

  MatX out = P;
  out.topLeftCorner(kImuErrDim, kImuErrDim) =
      phi * P.topLeftCorner(kImuErrDim, kImuErrDim) * phi.transpose() + qd;
  const int rest = dim - kImuErrDim;
  out.topRightCorner(kImuErrDim, rest) = phi * P.topRightCorner(kImuErrDim, rest);
  out.bottomLeftCorner(rest, kImuErrDim) = out.topRightCorner(kImuErrDim, rest).transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace fpvio
