#pragma once

#include "fpvio/core/types.hpp"

namespace fpvio {

/// One inertial sample, body frame. Timestamps are strictly increasing
/// within a stream.
struct ImuSample {
  double t = 0.0;        // s
  Vec3 omega_meas = Vec3::Zero();  // rad/s
  Vec3 accel_meas = Vec3::Zero();  // m/s²
};

/// Continuous-time noise densities plus world gravity.
struct ImuNoiseParams {
  double sigma_a = 0.001865;   // accel white noise, m/s²/√Hz
  double sigma_w = 0.001865;   // gyro white noise, rad/s/√Hz
  double sigma_ba = 0.002;     // accel bias random walk, m/s³/√Hz
  double sigma_bw = 4e-6;      // gyro bias random walk
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);  // world frame, m/s²
};

/// 16-element nominal state: position, velocity, attitude quaternion,
/// gyro bias, accel bias. q is q_w^i (world→IMU frame transform).
struct ImuState {
  Vec3 p = Vec3::Zero();    // m, world
  Vec3 v = Vec3::Zero();    // m/s, world
  Quat q;                   // q_w^i
  Vec3 bw = Vec3::Zero();   // rad/s
  Vec3 ba = Vec3::Zero();   // m/s²
};

}  // namespace fpvio
