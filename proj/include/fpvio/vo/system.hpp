#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "fpvio/fpsp/frame.hpp"
#include "fpvio/vo/pose_estimation.hpp"
#include "fpvio/vo/two_view.hpp"
#include "fpvio/vo/types.hpp"

namespace fpvio {

struct VoConfig {
  PinholeIntrinsics intrinsics;
  int match_radius = 4;            // frame-to-map tracking radius, px
  int keyframe_min_tracked = 60;   // insert keyframe below this match count
  double keyframe_baseline = 0.12; // or beyond this translation (unscaled)
  double init_parallax_px = 6.0;   // system gate before attempting bootstrap
  int init_min_features = 40;
  int triangulation_radius = 8;    // keyframe-to-keyframe search radius
  double max_point_age = 1.0;      // s without observation before pruning
  std::uint64_t seed = 1;
};

struct VoFrameResult {
  VoPose pose;
  PoseCovariance covariance = PoseCovariance::Zero();
  int tracked_matches = 0;
  bool keyframe_inserted = false;
};

/**
 * Monocular tracking over binary frames: bootstrap by two-view geometry,
 * then per-frame detect → describe → match-to-map → pose optimization, with
 * keyframe insertion and triangulation of fresh map points.
 *
 * The vision frame is the first keyframe's camera frame with the bootstrap
 * baseline as unit length, unless an init_alignment hook supplies an external
 * pose/scale seed at initialization time.
 */
class VoSystem {
 public:
  explicit VoSystem(const VoConfig& config) : cfg_(config) {}

  /// Called once when the two-view bootstrap succeeds, with the timestamps of
  /// both keyframes; returns the desired pose of the second keyframe's camera
  /// and the metric scale factor for the map.
  using InitAlignmentHook = std::function<std::pair<Pose, double>(double t0, double t1)>;
  void set_init_alignment(InitAlignmentHook hook) { init_alignment_ = std::move(hook); }

  /// Returns the tracked pose once the map is initialized; nullopt before.
  /// Throws std::runtime_error("tracking lost") when matching collapses.
  std::optional<VoFrameResult> process_frame(const BinaryFrame& frame);

  bool initialized() const { return initialized_; }
  size_t map_size() const { return map_.size(); }

  /// Features of a frame: detected corners (3 px off borders) + descriptors.
  std::vector<Feature> extract_features(const BinaryFrame& frame) const;

 private:
  struct Keyframe {
    double t = 0.0;
    VoPose pose;
    std::vector<Feature> features;
    std::vector<std::int64_t> point_ids;  // per feature; -1 when free
  };

  std::optional<VoFrameResult> try_initialize(const BinaryFrame& frame,
                                              std::vector<Feature>&& features);
  VoFrameResult track(const BinaryFrame& frame, std::vector<Feature>&& features);
  void insert_keyframe(double t, const VoPose& pose, const std::vector<Feature>& features,
                       const std::vector<std::int64_t>& feature_point_ids);
  double median_scene_depth(const VoPose& pose) const;
  void prune_map(double now);

  VoConfig cfg_;
  InitAlignmentHook init_alignment_;

  bool initialized_ = false;
  std::vector<Feature> reference_features_;
  double reference_t_ = 0.0;
  bool have_reference_ = false;

  std::vector<MapPoint> map_;
  std::int64_t next_point_id_ = 0;
  std::vector<Keyframe> keyframes_;
  VoPose last_pose_;
};

}  // namespace fpvio
