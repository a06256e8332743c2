#pragma once

#include "fpvio/core/types.hpp"

namespace fpvio {

/// ⌊v⌋ such that ⌊v⌋·u = v × u.
Mat3 skew(const Vec3& v);

/// Hamilton product q ⊗ p, renormalized.
Quat quat_mul(const Quat& q, const Quat& p);

Quat quat_conjugate(const Quat& q);

/// Unit-norm rescale; throws on (near-)zero quaternions.
Quat quat_normalize(const Quat& q);

/// Same rotation with w ≥ 0.
Quat quat_canonical(const Quat& q);

/// 4x4 antisymmetric Ω(ω) acting on scalar-first coefficients: q̇ = ½ Ω(ω) q.
Mat4 omega_matrix(const Vec3& omega);

/// Homomorphic rotation matrix C(q); see Quat for the frame convention.
RotationMatrix3 quat_to_rot(const Quat& q);

/// Inverse of quat_to_rot (canonical sign). Input must be a proper rotation.
Quat rot_to_quat(const RotationMatrix3& m);

/// Exact exponential map: rotation vector → unit quaternion.
/// Agrees with the first-order [½δθ, 1] form to O(‖δθ‖²).
Quat small_angle_to_quat(const SmallAngle& delta_theta);

/// Logarithm map, canonical sign, angle in [0, π).
/// Throws "axis ambiguous" as the angle reaches π.
SmallAngle quat_to_small_angle(const Quat& dq);

/// C(q)·v without forming the matrix.
Vec3 rotate(const Quat& q, const Vec3& v);

/// C(q)^T·v.
Vec3 rotate_inverse(const Quat& q, const Vec3& v);

/// Point transform into the pose's local frame: x_B = C(q_A^B)(x_A − p).
Vec3 pose_transform(const Pose& pose, const Vec3& x_parent);

/// Inverse point transform: x_A = p + C(q_A^B)^T x_B.
Vec3 pose_untransform(const Pose& pose, const Vec3& x_local);

/// Composition: pose of C in A given pose of B in A and pose of C in B.
Pose pose_compose(const Pose& pose_ab, const Pose& pose_bc);

Pose pose_inverse(const Pose& pose);

}  // namespace fpvio
