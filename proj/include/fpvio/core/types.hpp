#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>

namespace fpvio {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using MatX = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;

/// Rotation matrix; orthonormal with det +1 (checked in tests, not enforced).
using RotationMatrix3 = Mat3;

/// Small-angle rotation vector [rad]; intended for norms below ~0.5 rad.
using SmallAngle = Vec3;

/**
 * Unit quaternion, Hamiltonian, stored scalar-first as (w, x, y, z).
 *
 * Conventions used throughout (fixed once, self-consistent):
 *  - quat_mul is the Hamilton product (ij = k).
 *  - quat_to_rot(q) is the homomorphic rotation matrix: C(q⊗p) = C(q)·C(p).
 *  - A frame-transform quaternion q_A^B carries A-frame coordinates to
 *    B-frame coordinates: x_B = C(q_A^B)·x_A. Body attitude (body→world)
 *    is therefore C(q_w^i)^T.
 *  - Body angular rate ω gives q̇ = ½·Ω(ω)·q, integrated exactly as
 *    q⁺ = small_angle_to_quat(−ω·dt) ⊗ q.
 */
struct Quat {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Quat() = default;
  Quat(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {}

  static Quat identity() { return {}; }

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

  Eigen::Vector4d coeffs_wxyz() const { return {w, x, y, z}; }
  Vec3 vec() const { return {x, y, z}; }
};

/// Rigid pose of frame B in frame A: p = origin of B in A coordinates,
/// q = q_A^B (A→B frame transform).
struct Pose {
  Vec3 p = Vec3::Zero();
  Quat q = Quat::identity();
};

}  // namespace fpvio
