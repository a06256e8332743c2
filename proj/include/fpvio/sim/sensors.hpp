#pragma once

#include <cstdint>
#include <vector>

#include "fpvio/fpsp/frame.hpp"
#include "fpvio/imu/types.hpp"
#include "fpvio/sim/scene.hpp"
#include "fpvio/sim/trajectory.hpp"

namespace fpvio {

/// Synthesized IMU stream plus the realized bias walks (truth for tests).
struct ImuStreamTruth {
  std::vector<ImuSample> samples;
  std::vector<Vec3> bias_w;  // per sample
  std::vector<Vec3> bias_a;
};

/**
 * Exact-inverse IMU synthesis: per zero-order-hold interval the rate is the
 * exact relative-rotation logarithm and the specific force is solved so the
 * nominal integrator reproduces the analytic velocity, then bias walks and
 * white noise (σ/√dt) are layered on. Deterministic per seed. For duration T
 * this emits round(T·rate)+1 samples (both endpoints).
 */
ImuStreamTruth synthesize_imu(const TrajectorySampler& traj, const ImuNoiseParams& noise,
                              double rate, std::uint64_t seed,
                              const Vec3& initial_bias_w = Vec3::Zero(),
                              const Vec3& initial_bias_a = Vec3::Zero());

/// Camera pose of the IMU trajectory composed with the IMU→camera extrinsic,
/// at round(T·rate)+1 uniform timestamps (both endpoints).
std::vector<std::pair<double, Pose>> camera_schedule(const TrajectorySampler& traj,
                                                     double rate, const Pose& extrinsic);

struct SceneOptions {
  int target_visible = 140;      // landmarks per sampled view ("density")
  double min_depth = 1.2;        // m along the view ray
  double max_depth = 3.2;
  double min_pixel_separation = 8.0;
  double leg_length = 0.06;      // m, junction edge half-structures
  std::uint64_t seed = 7;
  double view_sample_rate = 4.0; // views per second used for the guarantee
};

/**
 * Scatters L-junction structures (a corner landmark plus two edge segments)
 * through the camera frusta along the trajectory so every sampled view sees
 * at least `target_visible` landmarks. Deterministic per seed.
 *
 * Throws std::invalid_argument("workspace too small") when the density target
 * is non-positive or unreachable.
 */
Scene synthesize_scene(const TrajectorySampler& traj, const Pose& extrinsic,
                       const PinholeIntrinsics& intrinsics, const SceneOptions& opts = {});

/// Landmarks of the scene visible from a camera pose (in-bounds, sane depth).
int count_visible_landmarks(const Scene& scene, const Pose& camera_pose,
                            const PinholeIntrinsics& intrinsics);

/// Calibrated IMU→camera extrinsic: p_i^c = (0.006, 0.04, 0.07) m with the
/// optical axis along body +x (camera right = −y_b, camera down = −z_b).
Pose default_imu_camera_extrinsic();

}  // namespace fpvio
