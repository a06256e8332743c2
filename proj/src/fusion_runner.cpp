#include "fpvio/fusion/runner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fpvio {

VecX default_initial_covariance(double sigma_bias_w, double sigma_bias_a) {
  VecX diag(kErrDim);
  diag.segment<3>(kIdxPos).setConstant(1e-6);
  diag.segment<3>(kIdxVel).setConstant(1e-4);
  diag.segment<3>(kIdxTheta).setConstant(1e-6);
  diag.segment<3>(kIdxBw).setConstant(sigma_bias_w * sigma_bias_w);
  diag.segment<3>(kIdxBa).setConstant(sigma_bias_a * sigma_bias_a);
  diag(kIdxLambda) = 1e-2;
  diag.segment<3>(kIdxThetaIc).setConstant(1e-6);
  diag.segment<3>(kIdxPwv).setConstant(1e-4);
  diag.segment<3>(kIdxThetaWv).setConstant(1e-4);
  return diag;
}

namespace {

// Zero-order-hold stepping over the sample stream.
struct ImuCursor {
  const std::vector<ImuSample>& samples;
  size_t idx = 0;
  double time;

  explicit ImuCursor(const std::vector<ImuSample>& s) : samples(s), time(s.front().t) {}

  void advance_to(double target, FilterState& state, MatX& cov,
                  const ImuNoiseParams& noise) {
    while (time < target - 1e-12) {
      while (idx + 1 < samples.size() && samples[idx + 1].t <= time + 1e-12) ++idx;
      const double segment_end =
          idx + 1 < samples.size() ? std::min(samples[idx + 1].t, target) : target;
      const double dt = segment_end - time;
      if (dt > 1e-12) predict(state, cov, samples[idx], dt, noise);
      time = segment_end;
    }
  }
};

}  // namespace

Trajectory run_fusion_stream(const std::vector<ImuSample>& imu_stream,
                             const MeasurementSource& source, const FusionConfig& config,
                             const FusionObserver& observer) {
  if (imu_stream.empty()) throw std::invalid_argument("empty IMU stream");
  for (size_t i = 1; i < imu_stream.size(); ++i)
    if (imu_stream[i].t <= imu_stream[i - 1].t)
      throw std::runtime_error("non-monotone stream");

  FilterState state = config.initial_state;
  VecX diag = config.initial_cov_diag.size() == kErrDim ? config.initial_cov_diag
                                                        : default_initial_covariance();
  MatX cov = diag.asDiagonal();

  std::vector<double> emit_times = config.emit_times;
  std::sort(emit_times.begin(), emit_times.end());
  size_t emit_idx = 0;

  const bool relative = config.update.mode == UpdateMode::kRelative;
  bool have_reference = false;
  VisionMeasurement reference;

  Trajectory out;
  ImuCursor cursor(imu_stream);
  auto emit = [&](double t) {
    out.samples.push_back({t, Pose{state.imu.p, state.imu.q}});
    if (observer) observer(t, state, cov);
  };
  auto flush_emits_until = [&](double t_limit) {
    while (emit_idx < emit_times.size() && emit_times[emit_idx] < t_limit) {
      cursor.advance_to(emit_times[emit_idx], state, cov, config.noise);
      emit(emit_times[emit_idx]);
      ++emit_idx;
    }
  };

  double last_t = -std::numeric_limits<double>::infinity();
  while (true) {
    std::optional<VisionMeasurement> z = source ? source() : std::nullopt;
    if (!z) break;
    if (z->t <= last_t) throw std::runtime_error("non-monotone stream");
    last_t = z->t;

    flush_emits_until(z->t);
    cursor.advance_to(z->t, state, cov, config.noise);

    if (relative) {
      if (!have_reference) {
        clone_state(state, cov, z->t);
        reference = *z;
        have_reference = true;
      } else {
        update(state, cov, make_relative_measurement(reference, *z), config.update);
        clone_state(state, cov, z->t);
        reference = *z;
      }
    } else {
      update(state, cov, *z, config.update);
    }
    emit(z->t);
  }
  flush_emits_until(std::numeric_limits<double>::infinity());
  return out;
}

Trajectory run_fusion(const std::vector<ImuSample>& imu_stream,
                      const std::vector<VisionMeasurement>& vo_stream,
                      const FusionConfig& config, const FusionObserver& observer) {
  size_t next = 0;
  const MeasurementSource source = [&]() -> std::optional<VisionMeasurement> {
    if (next >= vo_stream.size()) return std::nullopt;
    return vo_stream[next++];
  };
  return run_fusion_stream(imu_stream, source, config, observer);
}

}  // namespace fpvio
