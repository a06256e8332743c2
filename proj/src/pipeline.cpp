#include "fpvio/pipeline/pipeline.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "fpvio/core/geometry.hpp"
#include "fpvio/core/random.hpp"
#include "fpvio/fpsp/render.hpp"
#include "fpvio/io/formats.hpp"

namespace fpvio {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(const Clock::time_point& t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Bounded single-producer single-consumer queue carrying VO outputs.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(size_t capacity) : capacity_(capacity) {}

  void push(T item) {
    std::unique_lock lock(mutex_);
    not_full_.wait(lock, [&] { return queue_.size() < capacity_; });
    queue_.push_back(std::move(item));
    not_empty_.notify_one();
  }

  void close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    not_empty_.notify_one();
  }

  std::optional<T> pop() {
    std::unique_lock lock(mutex_);
    not_empty_.wait(lock, [&] { return !queue_.empty() || closed_; });
    if (queue_.empty()) return std::nullopt;
    T item = std::move(queue_.front());
    queue_.pop_front();
    not_full_.notify_one();
    return item;
  }

 private:
  size_t capacity_;
  std::mutex mutex_;
  std::condition_variable not_full_, not_empty_;
  std::deque<T> queue_;
  bool closed_ = false;
};

struct VoOutput {
  VisionMeasurement measurement;
  Pose body_pose;  // measurement mapped through the fixed extrinsic
  bool tracking_lost = false;
  double t = 0.0;
};

/// Body pose implied by a camera-pose measurement under nominal λ=1 and
/// identity drift (the aligned-simulation convention).
Pose measurement_to_body(const VisionMeasurement& z, const Pose& extrinsic) {
  Pose body;
  body.q = quat_mul(quat_conjugate(extrinsic.q), z.z_q);
  body.p = z.z_p - rotate_inverse(body.q, extrinsic.p);
  return body;
}

FilterState initial_filter_state(const RunConfig& config, const TrajectorySampler& traj) {
  const GroundTruthSample g0 = traj.sample(0.0);
  FilterState fs;
  fs.imu.p = g0.p;
  fs.imu.v = g0.v;
  fs.imu.q = g0.q;
  fs.imu.bw = Vec3::Zero();
  fs.imu.ba = Vec3::Zero();
  fs.lambda = 1.0;
  fs.q_ic = config.extrinsic.q;
  fs.p_ic = config.extrinsic.p;
  return fs;
}

Trajectory gt_at_times(const TrajectorySampler& traj, const std::vector<double>& times) {
  Trajectory out;
  for (const double t : times) {
    const GroundTruthSample g = traj.sample(t);
    out.samples.push_back({t, Pose{g.p, g.q}});
  }
  return out;
}

}  // namespace

PipelineInputs make_inputs(const RunConfig& config) {
  TrajectorySampler traj(config.trajectory);

  SceneOptions scene_opts;
  scene_opts.target_visible = config.scene_density;
  scene_opts.seed = Rng::derive(config.seed, 0x5ce9e);
  Scene scene = synthesize_scene(traj, config.extrinsic, config.intrinsics, scene_opts);

  Rng bias_rng(Rng::derive(config.seed, 0xb1a5));
  const Vec3 bw0 = config.init_bias_sigma_w * bias_rng.gaussian_vec3();
  const Vec3 ba0 = config.init_bias_sigma_a * bias_rng.gaussian_vec3();
  ImuStreamTruth imu = synthesize_imu(traj, config.noise, config.imu_rate,
                                      Rng::derive(config.seed, 0x101), bw0, ba0);

  return PipelineInputs{std::move(traj), std::move(scene), std::move(imu.samples)};
}

PipelineResult run_pipeline(const RunConfig& config, const PipelineInputs& inputs) {
  PipelineResult result;
  const auto schedule =
      camera_schedule(inputs.trajectory, config.cam_rate, config.extrinsic);
  result.frames = static_cast<int>(schedule.size());
  result.sim_seconds = inputs.trajectory.duration();

  // Sensor simulation: render every frame up front (camera hardware analog).
  const auto render_start = Clock::now();
  std::vector<BinaryFrame> frames(schedule.size());
  for (size_t i = 0; i < schedule.size(); ++i) {
    RenderOptions opts;
    opts.p_flip = config.p_flip;
    opts.seed = Rng::derive(config.seed, 0xf0000 + i);
    frames[i] = render_binary_frame(inputs.scene, schedule[i].second, config.intrinsics,
                                    opts);
    frames[i].t = schedule[i].first;
  }
  result.render_seconds = seconds_since(render_start);

  const auto processing_start = Clock::now();

  // Producer: frontend + VO, pushing measurements through a bounded queue.
  BoundedQueue<VoOutput> queue(32);
  std::vector<std::pair<double, Pose>> vo_body;
  std::exception_ptr producer_error;

  std::thread producer([&] {
    try {
      VoConfig vo_cfg = config.vo;
      vo_cfg.intrinsics = config.intrinsics;
      vo_cfg.seed = Rng::derive(config.seed, 0x70);
      VoSystem vo(vo_cfg);
      vo.set_init_alignment([&](double t0, double t1) {
        const Pose cam0 = pose_compose(
            [&] {
              const GroundTruthSample g = inputs.trajectory.sample(t0);
              return Pose{g.p, g.q};
            }(),
            config.extrinsic);
        const Pose cam1 = pose_compose(
            [&] {
              const GroundTruthSample g = inputs.trajectory.sample(t1);
              return Pose{g.p, g.q};
            }(),
            config.extrinsic);
        return std::make_pair(cam1, (cam1.p - cam0.p).norm());
      });

      Rng noise_rng(Rng::derive(config.seed, 0x1107));
      for (size_t i = 0; i < frames.size(); ++i) {
        std::optional<VoFrameResult> r;
        try {
          r = vo.process_frame(frames[i]);
        } catch (const std::runtime_error&) {
          VoOutput out;
          out.tracking_lost = true;
          out.t = frames[i].t;
          queue.push(std::move(out));
          queue.close();
          return;
        }
        if (!r) continue;

        VoOutput out;
        out.t = frames[i].t;
        out.measurement.t = frames[i].t;
        out.measurement.z_p = r->pose.p;
        out.measurement.z_q = r->pose.q;
        out.measurement.noise = r->covariance;
        if (config.vo_noise_sigma_p > 0.0 || config.vo_noise_sigma_theta > 0.0) {
          out.measurement.z_p += config.vo_noise_sigma_p * noise_rng.gaussian_vec3();
          out.measurement.z_q = quat_mul(
              small_angle_to_quat(config.vo_noise_sigma_theta * noise_rng.gaussian_vec3()),
              out.measurement.z_q);
          Mat6 injected = Mat6::Zero();
          injected.topLeftCorner<3, 3>() =
              config.vo_noise_sigma_p * config.vo_noise_sigma_p * Mat3::Identity();
          injected.bottomRightCorner<3, 3>() = config.vo_noise_sigma_theta *
                                               config.vo_noise_sigma_theta *
                                               Mat3::Identity();
          out.measurement.noise += injected;
        }
        out.body_pose = measurement_to_body(out.measurement, config.extrinsic);
        queue.push(std::move(out));
      }
      queue.close();
    } catch (...) {
      producer_error = std::current_exception();
      queue.close();
    }
  });

  // Consumer: single-writer fusion pulling from the queue.
  FusionConfig fusion_cfg;
  fusion_cfg.initial_state = initial_filter_state(config, inputs.trajectory);
  fusion_cfg.initial_cov_diag =
      default_initial_covariance(config.init_bias_sigma_w, config.init_bias_sigma_a);
  fusion_cfg.noise = config.noise;
  fusion_cfg.update = config.update;

  bool lost = false;
  double lost_t = 0.0;
  const MeasurementSource source = [&]() -> std::optional<VisionMeasurement> {
    while (true) {
      std::optional<VoOutput> out = queue.pop();
      if (!out) return std::nullopt;
      if (out->tracking_lost) {
        lost = true;
        lost_t = out->t;
        return std::nullopt;
      }
      vo_body.push_back({out->t, out->body_pose});
      result.measurements.push_back(out->measurement);
      return out->measurement;
    }
  };

  if (config.vo_enabled) {
    result.fused = run_fusion_stream(inputs.imu, source, fusion_cfg);
  } else {
    for (const auto& [t, pose] : schedule) fusion_cfg.emit_times.push_back(t);
    result.fused = run_fusion_stream(inputs.imu, {}, fusion_cfg);
  }
  producer.join();
  if (producer_error) std::rethrow_exception(producer_error);
  if (lost) throw TrackingLostError(lost_t);
  result.processing_seconds = seconds_since(processing_start);

  result.vo_only.samples = std::move(vo_body);

  // Dead reckoning on the shared timestamp grid.
  FusionConfig dead_cfg = fusion_cfg;
  dead_cfg.emit_times.clear();
  for (const auto& [t, pose] : result.fused.samples) dead_cfg.emit_times.push_back(t);
  result.imu_only = run_fusion_stream(inputs.imu, {}, dead_cfg);

  std::vector<double> grid;
  for (const auto& [t, pose] : result.fused.samples) grid.push_back(t);
  result.gt = gt_at_times(inputs.trajectory, grid);
  return result;
}

void cmd_simulate(const RunConfig& config) {
  const PipelineInputs inputs = make_inputs(config);
  try {
    fs::create_directories(config.out_dir);
    const std::string dir = config.out_dir + "/";

    Trajectory gt;
    for (const auto& s : inputs.imu) {
      const GroundTruthSample g = inputs.trajectory.sample(s.t);
      gt.samples.push_back({s.t, Pose{g.p, g.q}});
    }
    io::write_tum(dir + "gt.tum", gt);
    io::write_imu_csv(dir + "imu.csv", inputs.imu);
    io::write_scene_json(dir + "scene.json", inputs.scene);

    // Corner-plane events of every rendered frame.
    const auto schedule =
        camera_schedule(inputs.trajectory, config.cam_rate, config.extrinsic);
    std::vector<std::pair<double, CornerEvent>> events;
    for (size_t i = 0; i < schedule.size(); ++i) {
      RenderOptions opts;
      opts.p_flip = config.p_flip;
      opts.seed = Rng::derive(config.seed, 0xf0000 + i);
      const BinaryFrame frame = render_binary_frame(inputs.scene, schedule[i].second,
                                                    config.intrinsics, opts);
      for (const CornerEvent& e : event_readout(frame.corner_plane))
        events.push_back({schedule[i].first, e});
    }
    io::write_events_csv(dir + "events.csv", events);
    save_config_file(dir + "config.txt", config);
  } catch (const std::runtime_error& e) {
    throw IoError(std::string("simulate: ") + e.what());
  }
}

void cmd_run(const RunConfig& config) {
  const std::string dir = config.out_dir + "/";
  PipelineInputs inputs = [&] {
    try {
      TrajectorySampler traj(config.trajectory);
      Scene scene = io::read_scene_json(dir + "scene.json");
      std::vector<ImuSample> imu = io::read_imu_csv(dir + "imu.csv");
      return PipelineInputs{std::move(traj), std::move(scene), std::move(imu)};
    } catch (const std::runtime_error& e) {
      throw IoError(std::string("run: ") + e.what());
    }
  }();

  const PipelineResult result = run_pipeline(config, inputs);
  try {
    io::write_tum(dir + "imu_only.tum", result.imu_only);
    io::write_tum(dir + "vo_only.tum", result.vo_only);
    io::write_tum(dir + "fused.tum", result.fused);
  } catch (const std::runtime_error& e) {
    throw IoError(std::string("run: ") + e.what());
  }
  std::printf("processed %d frames, %zu VO updates; real-time factor %.2f "
              "(render %.2fs, processing %.2fs)\n",
              result.frames, result.measurements.size(), result.real_time_factor(),
              result.render_seconds, result.processing_seconds);
}

int cmd_evaluate(const std::string& est_path, const std::string& ref_path,
                 const std::string& out_dir, const std::string& label) {
  Trajectory est, ref;
  try {
    est = io::read_tum(est_path);
    ref = io::read_tum(ref_path);
  } catch (const std::runtime_error& e) {
    throw IoError(e.what());
  }

  const auto pairs = associate(est, ref);
  const Sim3 alignment = align_sim3(est, ref, pairs);
  const AteReport report = compute_ate(est, ref, pairs, alignment);

  try {
    fs::create_directories(out_dir);
    nlohmann::json j;
    j["trajectory"] = label;
    j["rmse"] = report.rmse;
    j["median"] = report.median;
    j["n_pairs"] = report.n_pairs;
    j["scale"] = report.alignment.scale;
    std::ofstream json_out(out_dir + "/" + label + "_ate.json");
    json_out << j.dump(1, '\t') << "\n";

    std::ofstream csv(out_dir + "/" + label + "_errors.csv");
    for (const auto& [i, jdx] : pairs) {
      const double e =
          (ref.samples[jdx].second.p - alignment.apply(est.samples[i].second.p)).norm();
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.9f,%.9g\n", est.samples[i].first, e);
      csv << buf;
    }
  } catch (const std::exception& e) {
    throw IoError(std::string("evaluate: ") + e.what());
  }
  std::printf("%s: RMSE: %.6f median: %.6f pairs: %d scale: %.4f\n", label.c_str(),
              report.rmse, report.median, report.n_pairs, report.alignment.scale);
  return 0;
}

double cmd_bench(const RunConfig& config, double seconds) {
  RunConfig bench_cfg = config;
  bench_cfg.trajectory.duration = seconds;
  bench_cfg.trajectory.length = std::max(0.3 * seconds, 0.5);
  const PipelineInputs inputs = make_inputs(bench_cfg);
  const PipelineResult result = run_pipeline(bench_cfg, inputs);
  std::printf("bench: %.1f sim-seconds, %d frames, %zu IMU samples\n", result.sim_seconds,
              result.frames, inputs.imu.size());
  std::printf("  render      %.3f s\n", result.render_seconds);
  std::printf("  processing  %.3f s  (frontend + VO + fusion)\n",
              result.processing_seconds);
  std::printf("  real-time factor %.2f (processing), %.2f (incl. render)\n",
              result.real_time_factor(),
              result.sim_seconds / (result.render_seconds + result.processing_seconds));
  return result.real_time_factor();
}

}  // namespace fpvio
