#include "fpvio/sim/sensors.hpp"

#include <cmath>
#include <stdexcept>

#include "fpvio/core/geometry.hpp"
#include "fpvio/core/random.hpp"

namespace fpvio {

ImuStreamTruth synthesize_imu(const TrajectorySampler& traj, const ImuNoiseParams& noise,
                              double rate, std::uint64_t seed, const Vec3& initial_bias_w,
                              const Vec3& initial_bias_a) {
  const double dt = 1.0 / rate;
  const double sq_dt = std::sqrt(dt);
  const int n = static_cast<int>(std::round(traj.duration() * rate));
  Rng rng(Rng::derive(seed, 0x1401));

  ImuStreamTruth out;
  out.samples.reserve(n + 1);
  Vec3 bw = initial_bias_w, ba = initial_bias_a;

  Vec3 omega_true = Vec3::Zero(), accel_true = Vec3::Zero();
  for (int k = 0; k <= n; ++k) {
    const double t0 = k * dt;
    if (k < n) {
      const GroundTruthSample g0 = traj.sample(t0);
      const GroundTruthSample g1 = traj.sample(t0 + dt);
      // Exact inverse of the zero-order-hold midpoint integrator.
      omega_true =
          -quat_to_small_angle(quat_mul(g1.q, quat_conjugate(g0.q))) / dt;
      const Quat q_half = quat_mul(small_angle_to_quat(-0.5 * dt * omega_true), g0.q);
      accel_true = rotate(q_half, (g1.v - g0.v) / dt + noise.gravity);
    }
    ImuSample s;
    s.t = t0;
    s.omega_meas = omega_true + bw + noise.sigma_w / sq_dt * rng.gaussian_vec3();
    s.accel_meas = accel_true + ba + noise.sigma_a / sq_dt * rng.gaussian_vec3();
    out.samples.push_back(s);
    out.bias_w.push_back(bw);
    out.bias_a.push_back(ba);
    bw += noise.sigma_bw * sq_dt * rng.gaussian_vec3();
    ba += noise.sigma_ba * sq_dt * rng.gaussian_vec3();
  }
  return out;
}

std::vector<std::pair<double, Pose>> camera_schedule(const TrajectorySampler& traj,
                                                     double rate, const Pose& extrinsic) {
  const int n = static_cast<int>(std::round(traj.duration() * rate));
  std::vector<std::pair<double, Pose>> out;
  out.reserve(n + 1);
  for (int k = 0; k <= n; ++k) {
    const double t = k / rate;
    const GroundTruthSample g = traj.sample(t);
    out.push_back({t, pose_compose(Pose{g.p, g.q}, extrinsic)});
  }
  return out;
}

Pose default_imu_camera_extrinsic() {
  Mat3 r;
  r << 0, -1, 0, 0, 0, -1, 1, 0, 0;
  Pose out;
  out.p = Vec3(0.006, 0.04, 0.07);
  out.q = rot_to_quat(r);
  return out;
}

int count_visible_landmarks(const Scene& scene, const Pose& camera_pose,
                            const PinholeIntrinsics& intrinsics) {
  int count = 0;
  for (const Vec3& lm : scene.landmarks) {
    const Vec3 x = pose_transform(camera_pose, lm);
    if (x.z() < 0.3 || x.z() > 6.0) continue;
    const Vec2 px = intrinsics.project(x);
    if (px.x() < 4 || px.x() > 251 || px.y() < 4 || px.y() > 251) continue;
    ++count;
  }
  return count;
}

Scene synthesize_scene(const TrajectorySampler& traj, const Pose& extrinsic,
                       const PinholeIntrinsics& intrinsics, const SceneOptions& opts) {
  if (opts.target_visible <= 0) throw std::invalid_argument("workspace too small");

  Rng rng(Rng::derive(opts.seed, 0x5ce11e));
  Scene scene;

  const int views = std::max(2, static_cast<int>(traj.duration() * opts.view_sample_rate));
  for (int v = 0; v <= views; ++v) {
    const double t = traj.duration() * v / views;
    const GroundTruthSample g = traj.sample(t);
    const Pose cam = pose_compose(Pose{g.p, g.q}, extrinsic);

    // Current visible set and its pixel footprint.
    std::vector<Vec2> occupied;
    for (const Vec3& lm : scene.landmarks) {
      const Vec3 x = pose_transform(cam, lm);
      if (x.z() < 0.3 || x.z() > 6.0) continue;
      const Vec2 px = intrinsics.project(x);
      if (px.x() < 4 || px.x() > 251 || px.y() < 4 || px.y() > 251) continue;
      occupied.push_back(px);
    }

    int missing = opts.target_visible - static_cast<int>(occupied.size());
    int attempts = 0;
    while (missing > 0) {
      if (++attempts > 20000) throw std::invalid_argument("workspace too small");
      const Vec2 px(rng.uniform(10.0, 245.0), rng.uniform(10.0, 245.0));
      bool clash = false;
      for (const Vec2& o : occupied) {
        if (std::fabs(o.x() - px.x()) < opts.min_pixel_separation &&
            std::fabs(o.y() - px.y()) < opts.min_pixel_separation) {
          clash = true;
          break;
        }
      }
      if (clash) continue;

      const double depth = rng.uniform(opts.min_depth, opts.max_depth);
      const Vec3 x_cam = depth * intrinsics.unproject(px);
      const Vec3 lm = pose_untransform(cam, x_cam);

      // Two junction legs spanning a plane transverse to the view ray.
      const Vec3 ray = rotate_inverse(cam.q, x_cam).normalized();
      Vec3 e1 = ray.cross(Vec3::UnitZ());
      if (e1.norm() < 1e-3) e1 = ray.cross(Vec3::UnitY());
      e1.normalize();
      const Vec3 e2 = ray.cross(e1).normalized();
      const double a0 = rng.uniform(0.0, 2.0 * M_PI);
      const double sep = rng.uniform(1.0, 2.1);
      const double l1 = opts.leg_length * rng.uniform(0.8, 1.3);
      const double l2 = opts.leg_length * rng.uniform(0.8, 1.3);
      const Vec3 d1 = std::cos(a0) * e1 + std::sin(a0) * e2;
      const Vec3 d2 = std::cos(a0 + sep) * e1 + std::sin(a0 + sep) * e2;

      scene.landmarks.push_back(lm);
      scene.segments.push_back({lm, lm + l1 * d1});
      scene.segments.push_back({lm, lm + l2 * d2});
      occupied.push_back(px);
      --missing;
    }
  }
  return scene;
}

}  // namespace fpvio
