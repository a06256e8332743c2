#include "fpvio/core/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace fpvio {

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

Quat quat_mul(const Quat& q, const Quat& p) {
  Quat r(q.w * p.w - q.x * p.x - q.y * p.y - q.z * p.z,
         q.w * p.x + q.x * p.w + q.y * p.z - q.z * p.y,
         q.w * p.y - q.x * p.z + q.y * p.w + q.z * p.x,
         q.w * p.z + q.x * p.y - q.y * p.x + q.z * p.w);
  return quat_normalize(r);
}

Quat quat_conjugate(const Quat& q) { return {q.w, -q.x, -q.y, -q.z}; }

Quat quat_normalize(const Quat& q) {
  const double n = q.norm();
  if (n < 1e-300) throw std::invalid_argument("cannot normalize zero quaternion");
  return {q.w / n, q.x / n, q.y / n, q.z / n};
}

Quat quat_canonical(const Quat& q) {
  if (q.w < 0.0) return {-q.w, -q.x, -q.y, -q.z};
  return q;
}

Mat4 omega_matrix(const Vec3& w) {
  Mat4 m;
  m << 0.0, w.x(), w.y(), w.z(),
       -w.x(), 0.0, w.z(), -w.y(),
       -w.y(), -w.z(), 0.0, w.x(),
       -w.z(), w.y(), -w.x(), 0.0;
  return m;
}

RotationMatrix3 quat_to_rot(const Quat& q) {
  const double w = q.w, x = q.x, y = q.y, z = q.z;
  Mat3 c;
  c << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y),
       2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),
       2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y);
  return c;
}

Quat rot_to_quat(const RotationMatrix3& m) {
  Quat q;
  const double tr = m.trace();
  if (tr > 0) {
    const double s = std::sqrt(tr + 1.0) * 2.0;
    q = Quat(0.25 * s, (m(2, 1) - m(1, 2)) / s, (m(0, 2) - m(2, 0)) / s,
             (m(1, 0) - m(0, 1)) / s);
  } else if (m(0, 0) > m(1, 1) && m(0, 0) > m(2, 2)) {
    const double s = std::sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2)) * 2.0;
    q = Quat((m(2, 1) - m(1, 2)) / s, 0.25 * s, (m(0, 1) + m(1, 0)) / s,
             (m(0, 2) + m(2, 0)) / s);
  } else if (m(1, 1) > m(2, 2)) {
    const double s = std::sqrt(1.0 + m(1, 1) - m(0, 0) - m(2, 2)) * 2.0;
    q = Quat((m(0, 2) - m(2, 0)) / s, (m(0, 1) + m(1, 0)) / s, 0.25 * s,
             (m(1, 2) + m(2, 1)) / s);
  } else {
    const double s = std::sqrt(1.0 + m(2, 2) - m(0, 0) - m(1, 1)) * 2.0;
    q = Quat((m(1, 0) - m(0, 1)) / s, (m(0, 2) + m(2, 0)) / s, (m(1, 2) + m(2, 1)) / s,
             0.25 * s);
  }
  return quat_canonical(quat_normalize(q));
}

Quat small_angle_to_quat(const SmallAngle& dtheta) {
  const double angle = dtheta.norm();
  // sin(θ/2)/θ with a series branch near zero.
  double k;
  if (angle < 1e-6) {
    k = 0.5 - angle * angle / 48.0;
  } else {
    k = std::sin(0.5 * angle) / angle;
  }
  Quat q(std::cos(0.5 * angle), k * dtheta.x(), k * dtheta.y(), k * dtheta.z());
  return quat_normalize(q);
}

SmallAngle quat_to_small_angle(const Quat& dq_in) {
  const Quat dq = quat_canonical(quat_normalize(dq_in));
  const double vn = dq.vec().norm();
  const double angle = 2.0 * std::atan2(vn, dq.w);
  if (angle >= M_PI - 1e-9) throw std::runtime_error("axis ambiguous");
  if (vn < 1e-12) return 2.0 * dq.vec();  // w ≈ 1 here
  return (angle / vn) * dq.vec();
}

Vec3 rotate(const Quat& q, const Vec3& v) {
  // q (0,v) q* expanded: v + 2w(u×v) + 2u×(u×v), u = vec(q).
  const Vec3 u = q.vec();
  const Vec3 t = 2.0 * u.cross(v);
  return v + q.w * t + u.cross(t);
}

Vec3 rotate_inverse(const Quat& q, const Vec3& v) { return rotate(quat_conjugate(q), v); }

Vec3 pose_transform(const Pose& pose, const Vec3& x_parent) {
  return rotate(pose.q, x_parent - pose.p);
}

Vec3 pose_untransform(const Pose& pose, const Vec3& x_local) {
  return pose.p + rotate_inverse(pose.q, x_local);
}

Pose pose_compose(const Pose& pose_ab, const Pose& pose_bc) {
  Pose out;
  out.q = quat_mul(pose_bc.q, pose_ab.q);
  out.p = pose_ab.p + rotate_inverse(pose_ab.q, pose_bc.p);
  return out;
}

Pose pose_inverse(const Pose& pose) {
  Pose out;
  out.q = quat_conjugate(pose.q);
  out.p = -rotate(pose.q, pose.p);
  return out;
}

}  // namespace fpvio
