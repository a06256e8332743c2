#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "fpvio/fusion/runner.hpp"
#include "fpvio/pipeline/config.hpp"

namespace fpvio {

struct TrackingLostError : std::runtime_error {
  explicit TrackingLostError(double time)
      : std::runtime_error("tracking lost at t=" + std::to_string(time)), t(time) {}
  double t;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Everything the pipeline consumes: the noisy IMU stream, the wireframe
/// scene, and the analytic trajectory (rendering + ground truth).
struct PipelineInputs {
  TrajectorySampler trajectory;
  Scene scene;
  std::vector<ImuSample> imu;
};

/// Synthesize inputs in memory from the configuration (deterministic per seed).
PipelineInputs make_inputs(const RunConfig& config);

struct PipelineResult {
  Trajectory imu_only;   // dead reckoning, body poses
  Trajectory vo_only;    // VO measurements mapped to body poses
  Trajectory fused;      // iEKF output, body poses
  Trajectory gt;         // ground truth at the shared emission grid
  std::vector<VisionMeasurement> measurements;
  double processing_seconds = 0.0;  // frontend + VO + fusion
  double render_seconds = 0.0;      // sensor simulation (excluded from RTF)
  double sim_seconds = 0.0;
  int frames = 0;
  /// Real-time factor of the processing stages.
  double real_time_factor() const {
    return processing_seconds > 0 ? sim_seconds / processing_seconds : 0.0;
  }
};

/**
 * Full offline pipeline: render frames (sensor sim), then run the
 * frontend+VO producer concurrently with the single-writer fusion consumer
 * through a bounded time-ordered queue. All three output trajectories share
 * the VO-update timestamp grid (camera grid when VO is disabled).
 * Throws TrackingLostError when the VO loses the map.
 */
PipelineResult run_pipeline(const RunConfig& config, const PipelineInputs& inputs);

// CLI entry points (file-level orchestration).
void cmd_simulate(const RunConfig& config);
void cmd_run(const RunConfig& config);
int cmd_evaluate(const std::string& est_path, const std::string& ref_path,
                 const std::string& out_dir, const std::string& label);
double cmd_bench(const RunConfig& config, double seconds);

}  // namespace fpvio
