#pragma once

#include <stdexcept>
#include <string>

#include "fpvio/fusion/filter.hpp"
#include "fpvio/sim/sensors.hpp"
#include "fpvio/sim/trajectory.hpp"
#include "fpvio/vo/system.hpp"

namespace fpvio {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/**
 * Flat key=value run configuration ('#' comments). Keys:
 *
 *   traj.family circle|straight|curve|zigzag|mixed, traj.length, traj.duration
 *   imu.rate, cam.rate, gravity.z
 *   imu.sigma_a, imu.sigma_w, imu.sigma_ba, imu.sigma_bw
 *   imu.init_bias_sigma_a, imu.init_bias_sigma_w
 *   cam.fx, cam.fy, cam.cx, cam.cy
 *   fpsp.p_flip
 *   vo.match_radius, vo.init_parallax_px, vo.keyframe_min_tracked,
 *   vo.keyframe_baseline, vo.noise_sigma_p, vo.noise_sigma_theta, vo.enabled
 *   fusion.mode relative|absolute, fusion.max_iterations,
 *   fusion.step_tolerance, fusion.nis_gate
 *   scene.density
 *   seed, out
 */
struct RunConfig {
  TrajectorySpec trajectory{TrajectoryFamily::kCircle, 2.1, 7.0, 1};
  double imu_rate = 400.0;
  double cam_rate = 300.0;
  ImuNoiseParams noise;
  double init_bias_sigma_w = 0.002;  // rad/s turn-on spread
  double init_bias_sigma_a = 0.02;   // m/s²
  PinholeIntrinsics intrinsics;
  Pose extrinsic = default_imu_camera_extrinsic();
  double p_flip = 2e-4;
  int scene_density = 140;
  VoConfig vo;
  bool vo_enabled = true;
  double vo_noise_sigma_p = 0.06;      // m, injected measurement noise
  double vo_noise_sigma_theta = 0.012; // rad
  UpdateConfig update;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
};

/// Parse a config file into `config` (missing file throws ConfigError).
void load_config_file(const std::string& path, RunConfig& config);

/// Apply one `key=value` override. Throws ConfigError on unknown keys.
void apply_config_entry(const std::string& key, const std::string& value,
                        RunConfig& config);

/// Table-1-style presets: trajectory type and length per label A..H.
void apply_trajectory_preset(char label, RunConfig& config);

/// Sets every stochastic knob to zero (noise-free closed loop).
void make_noise_free(RunConfig& config);

/// Write the effective configuration back out as key=value text.
void save_config_file(const std::string& path, const RunConfig& config);

}  // namespace fpvio
