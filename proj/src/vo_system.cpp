#include "fpvio/vo/system.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "fpvio/core/geometry.hpp"
#include "fpvio/vo/matching.hpp"

namespace fpvio {

std::vector<Feature> VoSystem::extract_features(const BinaryFrame& frame) const {
  std::vector<Feature> out;
  for (const CornerEvent& c : detect_corners(frame)) {
    if (c.x < 3 || c.x > 252 || c.y < 3 || c.y > 252) continue;
    Feature f;
    f.event = c;
    f.descriptor = extract_descriptor(frame, c);
    f.t = frame.t;
    out.push_back(f);
  }
  return out;
}

std::optional<VoFrameResult> VoSystem::process_frame(const BinaryFrame& frame) {
  std::vector<Feature> features = extract_features(frame);
  if (!initialized_) return try_initialize(frame, std::move(features));
  return track(frame, std::move(features));
}

std::optional<VoFrameResult> VoSystem::try_initialize(const BinaryFrame& frame,
                                                      std::vector<Feature>&& features) {
  if (!have_reference_) {
    if (static_cast<int>(features.size()) >= cfg_.init_min_features) {
      reference_features_ = std::move(features);
      reference_t_ = frame.t;
      have_reference_ = true;
    }
    return std::nullopt;
  }
  if (static_cast<int>(features.size()) < cfg_.init_min_features) return std::nullopt;

  InitOptions opts;
  opts.min_parallax_px = cfg_.init_parallax_px;
  opts.seed = cfg_.seed;
  TwoViewInit init;
  try {
    init = initialize_map(reference_features_, features, cfg_.intrinsics, opts);
  } catch (const std::exception&) {
    return std::nullopt;  // not enough parallax or matches yet; keep waiting
  }

  map_ = std::move(init.points);
  for (auto& mp : map_) {
    mp.id = next_point_id_++;
    mp.last_seen = frame.t;
  }

  Keyframe kf0;
  kf0.t = reference_t_;
  kf0.pose = VoPose{Vec3::Zero(), Quat::identity(), reference_t_};
  kf0.features = reference_features_;
  kf0.point_ids.assign(reference_features_.size(), -1);
  Keyframe kf1;
  kf1.t = frame.t;
  kf1.pose = VoPose{init.relative.p, init.relative.q, frame.t};
  kf1.features = features;
  kf1.point_ids.assign(features.size(), -1);
  for (size_t m = 0; m < init.inlier_matches.size(); ++m) {
    kf0.point_ids[init.inlier_matches[m].first] = map_[m].id;
    kf1.point_ids[init.inlier_matches[m].second] = map_[m].id;
  }

  if (init_alignment_) {
    const auto [target_pose, scale] = init_alignment_(reference_t_, frame.t);
    // Similarity carrying the current vision frame onto the target:
    // q_align = q_kf1^-1 ⊗ q_target, x_new = s·C^T(q_align)·x_old + t.
    const Quat q_align = quat_mul(quat_conjugate(kf1.pose.q), target_pose.q);
    const Vec3 t_align =
        target_pose.p - scale * rotate_inverse(q_align, kf1.pose.p);
    for (auto& mp : map_)
      mp.position = scale * rotate_inverse(q_align, mp.position) + t_align;
    for (Keyframe* kf : {&kf0, &kf1}) {
      kf->pose.p = scale * rotate_inverse(q_align, kf->pose.p) + t_align;
      kf->pose.q = quat_mul(kf->pose.q, q_align);
    }
  }

  keyframes_.clear();
  keyframes_.push_back(std::move(kf0));
  keyframes_.push_back(std::move(kf1));
  last_pose_ = keyframes_.back().pose;
  initialized_ = true;

  // Refine the bootstrap pose against the fresh map and report it.
  std::vector<PoseObservation> obs;
  const Keyframe& kf = keyframes_.back();
  std::unordered_map<std::int64_t, const MapPoint*> by_id;
  for (const auto& mp : map_) by_id[mp.id] = &mp;
  for (size_t i = 0; i < kf.features.size(); ++i) {
    if (kf.point_ids[i] < 0) continue;
    obs.push_back({by_id[kf.point_ids[i]]->position,
                   Vec2(kf.features[i].event.x, kf.features[i].event.y)});
  }
  VoFrameResult result;
  result.pose = estimate_pose(obs, last_pose_, cfg_.intrinsics);
  result.pose.t = frame.t;
  result.covariance = pose_covariance(obs, result.pose, cfg_.intrinsics);
  result.tracked_matches = static_cast<int>(obs.size());
  result.keyframe_inserted = true;
  last_pose_ = result.pose;
  return result;
}

double VoSystem::median_scene_depth(const VoPose& pose) const {
  std::vector<double> depths;
  for (const auto& mp : map_) {
    const double z = pose_transform(Pose{pose.p, pose.q}, mp.position).z();
    if (z > 0) depths.push_back(z);
  }
  if (depths.empty()) return 2.0;
  std::nth_element(depths.begin(), depths.begin() + depths.size() / 2, depths.end());
  return depths[depths.size() / 2];
}

VoFrameResult VoSystem::track(const BinaryFrame& frame, std::vector<Feature>&& features) {
  // Project active map points through the previous pose.
  std::vector<MatchReference> refs;
  std::vector<int> ref_points;
  const Pose last{last_pose_.p, last_pose_.q};
  for (size_t m = 0; m < map_.size(); ++m) {
    const Vec3 x = pose_transform(last, map_[m].position);
    if (x.z() < 0.05) continue;
    const Vec2 px = cfg_.intrinsics.project(x);
    if (px.x() < -4 || px.x() > 259 || px.y() < -4 || px.y() > 259) continue;
    refs.push_back({px, map_[m].descriptor});
    ref_points.push_back(static_cast<int>(m));
  }

  const auto matches = match_features(features, refs, cfg_.match_radius);
  if (static_cast<int>(matches.size()) < 6) throw std::runtime_error("tracking lost");

  std::vector<PoseObservation> obs;
  obs.reserve(matches.size());
  for (const auto& [i, j] : matches)
    obs.push_back(
        {map_[ref_points[j]].position, Vec2(features[i].event.x, features[i].event.y)});

  VoFrameResult result;
  result.pose = estimate_pose(obs, last_pose_, cfg_.intrinsics);
  result.pose.t = frame.t;
  result.covariance = pose_covariance(obs, result.pose, cfg_.intrinsics);
  result.tracked_matches = static_cast<int>(matches.size());

  std::vector<std::int64_t> feature_point_ids(features.size(), -1);
  for (const auto& [i, j] : matches) {
    MapPoint& mp = map_[ref_points[j]];
    mp.observation_count += 1;
    mp.last_seen = frame.t;
    mp.descriptor = features[i].descriptor;
    feature_point_ids[i] = mp.id;
  }

  const double baseline = (result.pose.p - keyframes_.back().pose.p).norm();
  if (result.tracked_matches < cfg_.keyframe_min_tracked ||
      baseline > cfg_.keyframe_baseline) {
    insert_keyframe(frame.t, result.pose, features, feature_point_ids);
    result.keyframe_inserted = true;
  }

  last_pose_ = result.pose;
  return result;
}

void VoSystem::insert_keyframe(double t, const VoPose& pose,
                               const std::vector<Feature>& features,
                               const std::vector<std::int64_t>& feature_point_ids) {
  Keyframe kf;
  kf.t = t;
  kf.pose = pose;
  kf.features = features;
  kf.point_ids = feature_point_ids;

  // Triangulate fresh points against the previous keyframe's free features.
  const Keyframe& prev = keyframes_.back();
  const double depth_hint = median_scene_depth(pose);
  const Pose prev_pose{prev.pose.p, prev.pose.q};
  const Pose cur_pose{pose.p, pose.q};

  std::vector<MatchReference> refs;
  std::vector<int> ref_feature_idx;
  for (size_t i = 0; i < prev.features.size(); ++i) {
    if (prev.point_ids[i] >= 0) continue;
    // Predict where the previous-keyframe feature lands now, assuming the
    // median scene depth along its ray.
    const Vec2 prev_px(prev.features[i].event.x, prev.features[i].event.y);
    const Vec3 ray = cfg_.intrinsics.unproject(prev_px);
    const Vec3 world = pose_untransform(prev_pose, depth_hint * ray);
    const Vec3 x = pose_transform(cur_pose, world);
    if (x.z() < 0.05) continue;
    const Vec2 px = cfg_.intrinsics.project(x);
    if (px.x() < -8 || px.x() > 263 || px.y() < -8 || px.y() > 263) continue;
    refs.push_back({px, prev.features[i].descriptor});
    ref_feature_idx.push_back(static_cast<int>(i));
  }

  std::vector<Feature> free_features;
  std::vector<int> free_idx;
  for (size_t i = 0; i < features.size(); ++i) {
    if (kf.point_ids[i] >= 0) continue;
    free_features.push_back(features[i]);
    free_idx.push_back(static_cast<int>(i));
  }

  if (!refs.empty() && !free_features.empty()) {
    for (const auto& [fi, rj] : match_features(free_features, refs,
                                               cfg_.triangulation_radius)) {
      const int cur_i = free_idx[fi];
      const int prev_i = ref_feature_idx[rj];
      const Vec2 cur_px(features[cur_i].event.x, features[cur_i].event.y);
      const Vec2 prev_px(prev.features[prev_i].event.x, prev.features[prev_i].event.y);
      Vec3 x;
      try {
        x = triangulate(prev_pose, cur_pose, prev_px, cur_px, cfg_.intrinsics);
      } catch (const std::runtime_error&) {
        continue;
      }
      if ((cfg_.intrinsics.project(pose_transform(prev_pose, x)) - prev_px).norm() > 2.0)
        continue;
      if ((cfg_.intrinsics.project(pose_transform(cur_pose, x)) - cur_px).norm() > 2.0)
        continue;
      MapPoint mp;
      mp.id = next_point_id_++;
      mp.position = x;
      mp.descriptor = features[cur_i].descriptor;
      mp.observation_count = 2;
      mp.last_seen = t;
      map_.push_back(mp);
      kf.point_ids[cur_i] = mp.id;
    }
  }

  keyframes_.push_back(std::move(kf));
  if (keyframes_.size() > 8) keyframes_.erase(keyframes_.begin());
  prune_map(t);
}

void VoSystem::prune_map(double now) {
  map_.erase(std::remove_if(map_.begin(), map_.end(),
                            [&](const MapPoint& mp) {
                              return now - mp.last_seen > cfg_.max_point_age;
                            }),
             map_.end());
}

}  // namespace fpvio
