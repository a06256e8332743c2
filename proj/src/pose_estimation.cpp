#include "fpvio/vo/pose_estimation.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "fpvio/core/geometry.hpp"

namespace fpvio {
namespace {

Eigen::Matrix<double, 2, 3> projection_gradient(const Vec3& x_cam,
                                                const PinholeIntrinsics& k) {
  const double z = x_cam.z();
  Eigen::Matrix<double, 2, 3> g;
  g << k.fx / z, 0.0, -k.fx * x_cam.x() / (z * z), 0.0, k.fy / z,
      -k.fy * x_cam.y() / (z * z);
  return g;
}

double huber_rho(double s, double delta) {
  const double d2 = delta * delta;
  return s <= d2 ? s : 2.0 * delta * std::sqrt(s) - d2;
}

double huber_weight(double s, double delta) {
  const double d2 = delta * delta;
  return s <= d2 ? 1.0 : delta / std::sqrt(s);
}

}  // namespace

double reprojection_cost(const std::vector<PoseObservation>& matches, const VoPose& pose,
                         const PinholeIntrinsics& k, double huber_delta_px) {
  double cost = 0.0;
  for (const auto& m : matches) {
    const Vec3 x = rotate(pose.q, m.point - pose.p);
    if (x.z() <= 1e-6) {
      cost += 1e9;  // behind-camera iterate; backtracking rejects it
      continue;
    }
    cost += huber_rho((m.pixel - k.project(x)).squaredNorm(), huber_delta_px);
  }
  return cost;
}

VoPose estimate_pose(const std::vector<PoseObservation>& matches, const VoPose& initial,
                     const PinholeIntrinsics& k, const PoseOptimizerOptions& opts) {
  if (matches.size() < 6) throw std::invalid_argument("underdetermined");

  VoPose pose = initial;
  double cost = reprojection_cost(matches, pose, k, opts.huber_delta_px);
  int fail_streak = 0;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    Mat6 h = Mat6::Zero();
    Vec6 g = Vec6::Zero();
    int usable = 0;
    const Mat3 c = quat_to_rot(pose.q);
    for (const auto& m : matches) {
      const Vec3 x = rotate(pose.q, m.point - pose.p);
      if (x.z() <= 1e-6) continue;
      ++usable;
      const Vec2 e = m.pixel - k.project(x);
      const double w = huber_weight(e.squaredNorm(), opts.huber_delta_px);
      // Right-multiplicative local step: x_c(δ) = C(q)(R(δθ)·X + δp − p).
      Eigen::Matrix<double, 2, 6> jac;
      const Eigen::Matrix<double, 2, 3> pi = projection_gradient(x, k);
      jac.leftCols<3>() = -pi * c;
      jac.rightCols<3>() = pi * c * skew(m.point);
      h += w * jac.transpose() * jac;
      g += w * jac.transpose() * e;
    }
    if (usable < 3) throw std::runtime_error("diverged");

    const Vec6 step = h.ldlt().solve(-g);
    if (!step.allFinite()) throw std::runtime_error("diverged");

    // Backtracking on the Huber cost.
    double alpha = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 6; ++bt) {
      const Vec3 dp = alpha * step.head<3>();
      const Vec3 dth = alpha * step.tail<3>();
      VoPose cand = pose;
      cand.q = quat_mul(pose.q, small_angle_to_quat(dth));
      cand.p = quat_to_rot(small_angle_to_quat(dth)).transpose() * (pose.p - dp);
      const double cand_cost = reprojection_cost(matches, cand, k, opts.huber_delta_px);
      if (cand_cost <= cost + 1e-12 * (1.0 + cost)) {
        pose = cand;
        cost = cand_cost;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (++fail_streak >= 3) throw std::runtime_error("diverged");
      continue;
    }
    fail_streak = 0;
    if (step.norm() < opts.step_tolerance) break;
  }
  return pose;
}

Eigen::Matrix<double, 2, 6> reprojection_jacobian(const Vec3& point, const VoPose& pose,
                                                  const PinholeIntrinsics& k) {
  const Vec3 x = rotate(pose.q, point - pose.p);
  const Eigen::Matrix<double, 2, 3> pi = projection_gradient(x, k);
  Eigen::Matrix<double, 2, 6> jac;
  // u(δ) = π((I + ⌊δθ⌋)·C(q)·(X − p − δp)).
  jac.leftCols<3>() = -pi * quat_to_rot(pose.q);
  jac.rightCols<3>() = -pi * skew(x);
  return jac;
}

PoseCovariance pose_covariance(const std::vector<PoseObservation>& matches,
                               const VoPose& optimized, const PinholeIntrinsics& k,
                               const PoseOptimizerOptions& opts) {
  if (matches.size() < 6) throw std::invalid_argument("underdetermined");

  Mat6 jtj = Mat6::Zero();
  double cost = 0.0;
  for (const auto& m : matches) {
    const Vec3 x = rotate(optimized.q, m.point - optimized.p);
    if (x.z() <= 1e-6) continue;
    const Vec2 e = m.pixel - k.project(x);
    const double s = e.squaredNorm();
    const double w = huber_weight(s, opts.huber_delta_px);
    cost += huber_rho(s, opts.huber_delta_px);
    const Eigen::Matrix<double, 2, 6> jac = reprojection_jacobian(m.point, optimized, k);
    jtj += w * jac.transpose() * jac;
  }

  Eigen::SelfAdjointEigenSolver<Mat6> eig(jtj);
  const double emin = eig.eigenvalues().minCoeff();
  const double emax = eig.eigenvalues().maxCoeff();
  if (emin <= 0.0 || emax / emin > 1e12) throw std::runtime_error("rank deficient");

  const double dof = 2.0 * static_cast<double>(matches.size()) - 6.0;
  const double sigma_sq = std::max(cost / dof, 1e-10);
  Mat6 cov = sigma_sq * jtj.inverse();
  return 0.5 * (cov + cov.transpose());
}

}  // namespace fpvio
