#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fpvio/core/types.hpp"

namespace fpvio {

enum class TrajectoryFamily { kCircle, kStraight, kCurve, kZigzag, kMixed };

TrajectoryFamily trajectory_family_from_string(const std::string& name);
std::string to_string(TrajectoryFamily family);

struct TrajectorySpec {
  TrajectoryFamily family = TrajectoryFamily::kCircle;
  double length = 2.0;    // m, arc length target (within 1%)
  double duration = 7.0;  // s
  std::uint64_t seed = 1;
};

/// Analytically consistent ground truth: v = ṗ and a_world = v̇ exactly.
struct GroundTruthSample {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 a_world = Vec3::Zero();
  Quat q;            // q_w^i
  Vec3 omega_body = Vec3::Zero();
};

/**
 * C²-continuous analytic path built from rest-to-rest quintic legs (lines and
 * planar arcs), with yaw following the leg headings and a bounded sinusoidal
 * roll/pitch excitation. Queryable at arbitrary t with exact derivatives.
 */
/// Roll/pitch excitation profile (observability of biases and scale).
struct TrajectoryExcitation {
  double roll_amp = 0.12;   // rad
  double pitch_amp = 0.10;
  double roll_freq = 0.9;   // Hz
  double pitch_freq = 0.7;
};

class TrajectorySampler {
 public:
  explicit TrajectorySampler(const TrajectorySpec& spec,
                             const TrajectoryExcitation& excitation = {});

  GroundTruthSample sample(double t) const;

  double duration() const { return spec_.duration; }
  const TrajectorySpec& spec() const { return spec_; }

  /// Numerical arc length (fine Simpson on ‖v‖), for tests and scaling.
  double arc_length() const;

 private:
  struct Leg {
    double t0 = 0.0, dt = 0.0;
    bool is_arc = false;
    // line
    Vec3 p0 = Vec3::Zero();
    Vec3 dir = Vec3::UnitX();
    double len = 0.0;
    double zbob = 0.0;
    // arc (xy plane)
    Vec3 center = Vec3::Zero();
    double radius = 0.0, phi0 = 0.0, dphi = 0.0;
    // yaw blend (lines); arcs follow the tangent
    double yaw0 = 0.0, dyaw = 0.0;
  };

  void build_legs();
  const Leg& leg_at(double t) const;

  TrajectorySpec spec_;
  TrajectoryExcitation excitation_;
  std::vector<Leg> legs_;
};

inline TrajectorySampler generate_trajectory(const TrajectorySpec& spec) {
  return TrajectorySampler(spec);
}

}  // namespace fpvio
