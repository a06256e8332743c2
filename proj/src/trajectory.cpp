#include "fpvio/sim/trajectory.hpp"

#include <cmath>
#include <stdexcept>

#include "fpvio/core/geometry.hpp"
#include "fpvio/core/random.hpp"

namespace fpvio {
namespace {

// Quintic smoothstep and derivatives: rest-to-rest with zero end acceleration.
double qs(double u) { return u * u * u * (10.0 + u * (-15.0 + 6.0 * u)); }
double qs_d(double u) { return u * u * (30.0 + u * (-60.0 + 30.0 * u)); }
double qs_dd(double u) { return u * (60.0 + u * (-180.0 + 120.0 * u)); }

// C² bump vanishing with two derivatives at both ends, peak 1 at u = ½.
double bump(double u) { return 64.0 * std::pow(u * (1.0 - u), 3.0); }
double bump_d(double u) { return 192.0 * u * u * (1.0 - u) * (1.0 - u) * (1.0 - 2.0 * u); }
double bump_dd(double u) {
  return 384.0 * u * (1.0 - u) * ((1.0 - 2.0 * u) * (1.0 - 2.0 * u) - u * (1.0 - u));
}

struct Angle {
  double value = 0.0, rate = 0.0, acc = 0.0;
};

}  // namespace

TrajectoryFamily trajectory_family_from_string(const std::string& name) {
  if (name == "circle") return TrajectoryFamily::kCircle;
  if (name == "straight") return TrajectoryFamily::kStraight;
  if (name == "curve") return TrajectoryFamily::kCurve;
  if (name == "zigzag") return TrajectoryFamily::kZigzag;
  if (name == "mixed") return TrajectoryFamily::kMixed;
  throw std::invalid_argument("unknown trajectory family: " + name);
}

std::string to_string(TrajectoryFamily family) {
  switch (family) {
    case TrajectoryFamily::kCircle: return "circle";
    case TrajectoryFamily::kStraight: return "straight";
    case TrajectoryFamily::kCurve: return "curve";
    case TrajectoryFamily::kZigzag: return "zigzag";
    case TrajectoryFamily::kMixed: return "mixed";
  }
  return "?";
}

TrajectorySampler::TrajectorySampler(const TrajectorySpec& spec,
                                     const TrajectoryExcitation& excitation)
    : spec_(spec), excitation_(excitation) {
  if (spec.length <= 0.0 || spec.duration <= 0.0)
    throw std::invalid_argument("trajectory spec must have positive length and duration");
  build_legs();
}

void TrajectorySampler::build_legs() {
  Rng rng(Rng::derive(spec_.seed, 0xa11ce));
  std::vector<Leg> legs;

  auto line_heading = [](const Vec3& d) { return std::atan2(d.y(), d.x()); };

  auto add_line = [&](Vec3 p0, const Vec3& dir, double len, double yaw_from, double zbob) {
    Leg leg;
    leg.is_arc = false;
    leg.p0 = p0;
    leg.dir = dir.normalized();
    leg.len = len;
    leg.zbob = zbob;
    leg.yaw0 = yaw_from;
    double target = line_heading(dir);
    while (target - yaw_from > M_PI) target -= 2.0 * M_PI;
    while (target - yaw_from < -M_PI) target += 2.0 * M_PI;
    leg.dyaw = target - yaw_from;
    legs.push_back(leg);
    return p0 + leg.dir * len;
  };

  // An arc continuing from point p with entry heading `yaw`; turns by dphi.
  auto add_arc = [&](Vec3 p, double yaw, double radius,
                     double dphi) -> std::pair<Vec3, double> {
    Leg leg;
    leg.is_arc = true;
    leg.radius = radius;
    leg.dphi = dphi;
    // Tangent heading at phi is phi + π/2·sign(dphi); entry tangent == yaw.
    const double side = dphi >= 0 ? 1.0 : -1.0;
    leg.phi0 = yaw - side * M_PI / 2.0;
    leg.center = p - radius * Vec3(std::cos(leg.phi0), std::sin(leg.phi0), 0.0);
    legs.push_back(leg);
    const double phi1 = leg.phi0 + dphi;
    const Vec3 exit = leg.center + radius * Vec3(std::cos(phi1), std::sin(phi1), 0.0);
    return {exit, yaw + dphi};
  };

  switch (spec_.family) {
    case TrajectoryFamily::kStraight: {
      add_line(Vec3::Zero(), Vec3::UnitX(), 1.0, 0.0, 0.0);
      break;
    }
    case TrajectoryFamily::kCircle: {
      Leg leg;
      leg.is_arc = true;
      leg.radius = 1.0 / (2.0 * M_PI);
      leg.dphi = rng.uniform() < 0.5 ? 2.0 * M_PI : -2.0 * M_PI;
      leg.phi0 = rng.uniform(0.0, 2.0 * M_PI);
      leg.center = -leg.radius * Vec3(std::cos(leg.phi0), std::sin(leg.phi0), 0.0);
      legs.push_back(leg);
      break;
    }
    case TrajectoryFamily::kCurve: {
      const double dphi = (rng.uniform() < 0.5 ? 1.0 : -1.0) * rng.uniform(1.8, 2.6);
      add_arc(Vec3::Zero(), rng.uniform(0.0, 2.0 * M_PI), 1.0 / std::fabs(dphi), dphi);
      break;
    }
    case TrajectoryFamily::kZigzag: {
      const int n = 4 + static_cast<int>(rng.index(2));
      Vec3 p = Vec3::Zero();
      double heading = rng.uniform(-0.3, 0.3);
      double yaw = heading;
      for (int i = 0; i < n; ++i) {
        const Vec3 dir(std::cos(heading), std::sin(heading), 0.0);
        const double len = rng.uniform(0.8, 1.2);
        p = add_line(p, dir, len, yaw, i % 2 == 0 ? 0.04 : 0.0);
        yaw = heading;
        heading += (i % 2 == 0 ? 1.0 : -1.0) * rng.uniform(0.9, 1.4);
      }
      break;
    }
    case TrajectoryFamily::kMixed: {
      Vec3 p = Vec3::Zero();
      double yaw = rng.uniform(-0.3, 0.3);
      p = add_line(p, Vec3(std::cos(yaw), std::sin(yaw), 0.0), rng.uniform(0.8, 1.2), yaw,
                   0.05);
      const double turn1 = (rng.uniform() < 0.5 ? 1.0 : -1.0) * rng.uniform(1.2, 2.0);
      auto [p1, yaw1] = add_arc(p, yaw, rng.uniform(0.25, 0.45), turn1);
      const double zig = (rng.uniform() < 0.5 ? 1.0 : -1.0) * rng.uniform(0.8, 1.2);
      const double h2 = yaw1 + zig;
      const Vec3 d2(std::cos(h2), std::sin(h2), 0.0);
      p = add_line(p1, d2, rng.uniform(0.7, 1.1), yaw1, 0.04);
      const double turn2 = (rng.uniform() < 0.5 ? 1.0 : -1.0) * rng.uniform(1.0, 1.8);
      auto [p3, yaw3] = add_arc(p, h2, rng.uniform(0.25, 0.45), turn2);
      add_line(p3, Vec3(std::cos(yaw3), std::sin(yaw3), 0.0), rng.uniform(0.6, 1.0), yaw3,
               0.0);
      break;
    }
  }

  // Nominal arc lengths per leg (lines exact; arcs r·|dphi|; the z-bob
  // correction lands in the global numeric rescale below).
  std::vector<double> nominal;
  double total = 0.0;
  for (const auto& leg : legs) {
    const double l = leg.is_arc ? leg.radius * std::fabs(leg.dphi) : leg.len;
    nominal.push_back(l);
    total += l;
  }
  double t0 = 0.0;
  for (size_t i = 0; i < legs.size(); ++i) {
    legs[i].t0 = t0;
    legs[i].dt = spec_.duration * nominal[i] / total;
    t0 += legs[i].dt;
  }
  legs_ = std::move(legs);

  // Rescale the geometry so the numeric arc length hits the target.
  const double measured = arc_length();
  const double k = spec_.length / measured;
  for (auto& leg : legs_) {
    leg.p0 *= k;
    leg.len *= k;
    leg.zbob *= k;
    leg.center *= k;
    leg.radius *= k;
  }
}

const TrajectorySampler::Leg& TrajectorySampler::leg_at(double t) const {
  for (const auto& leg : legs_) {
    if (t <= leg.t0 + leg.dt) return leg;
  }
  return legs_.back();
}

GroundTruthSample TrajectorySampler::sample(double t) const {
  const double tc = std::clamp(t, 0.0, spec_.duration);
  const Leg& leg = leg_at(tc);
  const double u = std::clamp((tc - leg.t0) / leg.dt, 0.0, 1.0);
  const double w = qs(u), wd = qs_d(u) / leg.dt, wdd = qs_dd(u) / (leg.dt * leg.dt);

  GroundTruthSample out;
  out.t = t;
  Angle yaw;
  if (!leg.is_arc) {
    const Vec3 d = leg.dir * leg.len;
    out.p = leg.p0 + d * w;
    out.v = d * wd;
    out.a_world = d * wdd;
    if (leg.zbob != 0.0) {
      out.p.z() += leg.zbob * bump(u);
      out.v.z() += leg.zbob * bump_d(u) / leg.dt;
      out.a_world.z() += leg.zbob * bump_dd(u) / (leg.dt * leg.dt);
    }
    yaw.value = leg.yaw0 + leg.dyaw * w;
    yaw.rate = leg.dyaw * wd;
    yaw.acc = leg.dyaw * wdd;
  } else {
    const double phi = leg.phi0 + leg.dphi * w;
    const double phid = leg.dphi * wd, phidd = leg.dphi * wdd;
    const Vec3 radial(std::cos(phi), std::sin(phi), 0.0);
    const Vec3 tangent(-std::sin(phi), std::cos(phi), 0.0);
    out.p = leg.center + leg.radius * radial;
    out.v = leg.radius * phid * tangent;
    out.a_world = leg.radius * (phidd * tangent - phid * phid * radial);
    const double side = leg.dphi >= 0 ? 1.0 : -1.0;
    yaw.value = phi + side * M_PI / 2.0;
    yaw.rate = phid;
    yaw.acc = phidd;
  }

  // Sinusoidal roll/pitch excitation under a C² envelope over the whole run.
  const double ug = tc / spec_.duration;
  const double env = bump(ug);
  const double envd = bump_d(ug) / spec_.duration;
  const double envdd = bump_dd(ug) / (spec_.duration * spec_.duration);
  auto excite = [&](double amp, double freq, double phase) {
    const double om = 2.0 * M_PI * freq;
    const double s = std::sin(om * tc + phase), c = std::cos(om * tc + phase);
    Angle a;
    a.value = amp * s * env;
    a.rate = amp * (om * c * env + s * envd);
    a.acc = amp * (-om * om * s * env + 2.0 * om * c * envd + s * envdd);
    return a;
  };
  const Angle roll = excite(excitation_.roll_amp, excitation_.roll_freq, 0.4);
  const Angle pitch = excite(excitation_.pitch_amp, excitation_.pitch_freq, 1.7);

  // Attitude R_wb = Rz(yaw)·Ry(pitch)·Rx(roll); q_w^i carries world→body.
  auto axis_quat = [](double half_axis_x, double half_axis_y, double half_axis_z,
                      double angle) {
    const double h = 0.5 * angle;
    return Quat(std::cos(h), half_axis_x * std::sin(h), half_axis_y * std::sin(h),
                half_axis_z * std::sin(h));
  };
  const Quat q_att = quat_mul(axis_quat(0, 0, 1, yaw.value),
                              quat_mul(axis_quat(0, 1, 0, pitch.value),
                                       axis_quat(1, 0, 0, roll.value)));
  out.q = quat_conjugate(q_att);

  // ZYX Euler rates to body rates.
  const double sr = std::sin(roll.value), cr = std::cos(roll.value);
  const double sp = std::sin(pitch.value), cp = std::cos(pitch.value);
  out.omega_body = Vec3(roll.rate - yaw.rate * sp,
                        pitch.rate * cr + yaw.rate * cp * sr,
                        -pitch.rate * sr + yaw.rate * cp * cr);
  return out;
}

double TrajectorySampler::arc_length() const {
  // Composite Simpson over each leg.
  double total = 0.0;
  for (const auto& leg : legs_) {
    const int n = 400;  // even
    const double h = leg.dt / n;
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double speed = sample(leg.t0 + i * h).v.norm();
      const double wgt = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      sum += wgt * speed;
    }
    total += sum * h / 3.0;
  }
  return total;
}

}  // namespace fpvio
