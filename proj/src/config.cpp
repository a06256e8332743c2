#include "fpvio/pipeline/config.hpp"

#include <fstream>
#include <sstream>

namespace fpvio {
namespace {

double to_double(const std::string& v) {
  size_t pos = 0;
  const double d = std::stod(v, &pos);
  if (pos != v.size()) throw ConfigError("bad numeric value: " + v);
  return d;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ConfigError("bad boolean value: " + v);
}

}  // namespace

void apply_config_entry(const std::string& key, const std::string& value,
                        RunConfig& c) {
  try {
    if (key == "traj.family") {
      c.trajectory.family = trajectory_family_from_string(value);
    } else if (key == "traj.length") {
      c.trajectory.length = to_double(value);
    } else if (key == "traj.duration") {
      c.trajectory.duration = to_double(value);
    } else if (key == "imu.rate") {
      c.imu_rate = to_double(value);
    } else if (key == "cam.rate") {
      c.cam_rate = to_double(value);
    } else if (key == "gravity.z") {
      c.noise.gravity = Vec3(0, 0, to_double(value));
    } else if (key == "imu.sigma_a") {
      c.noise.sigma_a = to_double(value);
    } else if (key == "imu.sigma_w") {
      c.noise.sigma_w = to_double(value);
    } else if (key == "imu.sigma_ba") {
      c.noise.sigma_ba = to_double(value);
    } else if (key == "imu.sigma_bw") {
      c.noise.sigma_bw = to_double(value);
    } else if (key == "imu.init_bias_sigma_a") {
      c.init_bias_sigma_a = to_double(value);
    } else if (key == "imu.init_bias_sigma_w") {
      c.init_bias_sigma_w = to_double(value);
    } else if (key == "cam.fx") {
      c.intrinsics.fx = to_double(value);
    } else if (key == "cam.fy") {
      c.intrinsics.fy = to_double(value);
    } else if (key == "cam.cx") {
      c.intrinsics.cx = to_double(value);
    } else if (key == "cam.cy") {
      c.intrinsics.cy = to_double(value);
    } else if (key == "fpsp.p_flip") {
      c.p_flip = to_double(value);
    } else if (key == "scene.density") {
      c.scene_density = static_cast<int>(to_double(value));
    } else if (key == "vo.match_radius") {
      c.vo.match_radius = static_cast<int>(to_double(value));
    } else if (key == "vo.init_parallax_px") {
      c.vo.init_parallax_px = to_double(value);
    } else if (key == "vo.keyframe_min_tracked") {
      c.vo.keyframe_min_tracked = static_cast<int>(to_double(value));
    } else if (key == "vo.keyframe_baseline") {
      c.vo.keyframe_baseline = to_double(value);
    } else if (key == "vo.noise_sigma_p") {
      c.vo_noise_sigma_p = to_double(value);
    } else if (key == "vo.noise_sigma_theta") {
      c.vo_noise_sigma_theta = to_double(value);
    } else if (key == "vo.enabled") {
      c.vo_enabled = to_bool(value);
    } else if (key == "fusion.mode") {
      if (value == "relative") {
        c.update.mode = UpdateMode::kRelative;
      } else if (value == "absolute") {
        c.update.mode = UpdateMode::kAbsolute;
      } else {
        throw ConfigError("fusion.mode must be relative or absolute");
      }
    } else if (key == "fusion.max_iterations") {
      c.update.max_iterations = static_cast<int>(to_double(value));
    } else if (key == "fusion.step_tolerance") {
      c.update.step_tolerance = to_double(value);
    } else if (key == "fusion.nis_gate") {
      c.update.nis_gate = to_bool(value);
    } else if (key == "seed") {
      c.seed = static_cast<std::uint64_t>(to_double(value));
      c.trajectory.seed = c.seed;
    } else if (key == "out") {
      c.out_dir = value;
    } else {
      throw ConfigError("unknown config key: " + key);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

void load_config_file(const std::string& path, RunConfig& config) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    // Trim.
    const size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const size_t e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    if (const size_t ke = key.find_last_not_of(" \t"); ke != std::string::npos)
      key.resize(ke + 1);
    if (const size_t vb = value.find_first_not_of(" \t"); vb != std::string::npos)
      value = value.substr(vb);
    apply_config_entry(key, value, config);
  }
}

void apply_trajectory_preset(char label, RunConfig& config) {
  struct Preset {
    TrajectoryFamily family;
    double length;
    double duration;
  };
  Preset p;
  switch (label) {
    case 'A': p = {TrajectoryFamily::kCircle, 2.1, 7.0}; break;
    case 'B': p = {TrajectoryFamily::kCurve, 2.6, 8.5}; break;
    case 'C': p = {TrajectoryFamily::kStraight, 1.7, 5.5}; break;
    case 'D': p = {TrajectoryFamily::kMixed, 2.12, 7.0}; break;
    case 'E': p = {TrajectoryFamily::kZigzag, 2.4, 8.0}; break;
    case 'F': p = {TrajectoryFamily::kMixed, 2.01, 6.5}; break;
    case 'G': p = {TrajectoryFamily::kZigzag, 1.8, 6.0}; break;
    case 'H': p = {TrajectoryFamily::kMixed, 2.55, 8.5}; break;
    default: throw ConfigError(std::string("unknown trajectory preset: ") + label);
  }
  config.trajectory.family = p.family;
  config.trajectory.length = p.length;
  config.trajectory.duration = p.duration;
}

void make_noise_free(RunConfig& config) {
  config.noise.sigma_a = config.noise.sigma_w = 0.0;
  config.noise.sigma_ba = config.noise.sigma_bw = 0.0;
  config.init_bias_sigma_a = config.init_bias_sigma_w = 0.0;
  config.p_flip = 0.0;
  config.vo_noise_sigma_p = config.vo_noise_sigma_theta = 0.0;
}

void save_config_file(const std::string& path, const RunConfig& c) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file " + path);
  char buf[128];
  auto kv = [&](const std::string& key, double v) {
    std::snprintf(buf, sizeof(buf), "%s=%.12g\n", key.c_str(), v);
    out << buf;
  };
  out << "traj.family=" << to_string(c.trajectory.family) << "\n";
  kv("traj.length", c.trajectory.length);
  kv("traj.duration", c.trajectory.duration);
  kv("imu.rate", c.imu_rate);
  kv("cam.rate", c.cam_rate);
  kv("gravity.z", c.noise.gravity.z());
  kv("imu.sigma_a", c.noise.sigma_a);
  kv("imu.sigma_w", c.noise.sigma_w);
  kv("imu.sigma_ba", c.noise.sigma_ba);
  kv("imu.sigma_bw", c.noise.sigma_bw);
  kv("imu.init_bias_sigma_a", c.init_bias_sigma_a);
  kv("imu.init_bias_sigma_w", c.init_bias_sigma_w);
  kv("cam.fx", c.intrinsics.fx);
  kv("cam.fy", c.intrinsics.fy);
  kv("cam.cx", c.intrinsics.cx);
  kv("cam.cy", c.intrinsics.cy);
  kv("fpsp.p_flip", c.p_flip);
  kv("scene.density", c.scene_density);
  kv("vo.match_radius", c.vo.match_radius);
  kv("vo.init_parallax_px", c.vo.init_parallax_px);
  kv("vo.keyframe_min_tracked", c.vo.keyframe_min_tracked);
  kv("vo.keyframe_baseline", c.vo.keyframe_baseline);
  kv("vo.noise_sigma_p", c.vo_noise_sigma_p);
  kv("vo.noise_sigma_theta", c.vo_noise_sigma_theta);
  out << "vo.enabled=" << (c.vo_enabled ? "true" : "false") << "\n";
  out << "fusion.mode="
      << (c.update.mode == UpdateMode::kRelative ? "relative" : "absolute") << "\n";
  kv("fusion.max_iterations", c.update.max_iterations);
  kv("fusion.step_tolerance", c.update.step_tolerance);
  out << "fusion.nis_gate=" << (c.update.nis_gate ? "true" : "false") << "\n";
  kv("seed", static_cast<double>(c.seed));
  out << "out=" << c.out_dir << "\n";
}

}  // namespace fpvio
