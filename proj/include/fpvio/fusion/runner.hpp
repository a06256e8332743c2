#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "fpvio/eval/ate.hpp"
#include "fpvio/fusion/filter.hpp"

namespace fpvio {

struct FusionConfig {
  FilterState initial_state;
  VecX initial_cov_diag;  // 25 entries; default from default_initial_covariance()
  ImuNoiseParams noise;
  UpdateConfig update;
  /// Extra timestamps to emit at (propagation only); VO updates always emit.
  std::vector<double> emit_times;
};

/// Initial error variances: pose/velocity/attitude small, biases per turn-on
/// spread, λ 1e-2 and drift states 1e-4.
VecX default_initial_covariance(double sigma_bias_w = 0.002, double sigma_bias_a = 0.02);

/// Per-emission observer (for consistency checks and logging).
using FusionObserver = std::function<void(double t, const FilterState&, const MatX&)>;

/// Pull-based measurement stream; returns nullopt at end of stream.
using MeasurementSource = std::function<std::optional<VisionMeasurement>()>;

/**
 * Processes IMU samples (zero-order hold) and vision measurements in global
 * time order, propagating to each measurement time and applying the iEKF
 * update (with stochastic cloning in relative mode; the first measurement
 * only seeds the clone). Emits the fused IMU pose at every VO update and at
 * the configured emit times. Throws "non-monotone stream".
 */
Trajectory run_fusion(const std::vector<ImuSample>& imu_stream,
                      const std::vector<VisionMeasurement>& vo_stream,
                      const FusionConfig& config, const FusionObserver& observer = {});

/// Same contract with measurements pulled lazily (bounded-queue pipelines).
Trajectory run_fusion_stream(const std::vector<ImuSample>& imu_stream,
                             const MeasurementSource& source, const FusionConfig& config,
                             const FusionObserver& observer = {});

}  // namespace fpvio
