#pragma once

#include <cstdint>
#include <vector>

#include "fpvio/core/types.hpp"
#include "fpvio/fpsp/features.hpp"

namespace fpvio {

/// Corner + descriptor observation at time t.
struct Feature {
  CornerEvent event;
  BitDescriptor descriptor;
  double t = 0.0;
};

/// Triangulated 3D point in the vision frame (unscaled metric).
struct MapPoint {
  std::int64_t id = 0;
  Vec3 position = Vec3::Zero();
  BitDescriptor descriptor;
  int observation_count = 0;
  double last_seen = 0.0;
};

/// Monocular camera pose in the vision frame: p_v^c, q_v^c.
struct VoPose {
  Vec3 p = Vec3::Zero();  // camera center in vision coordinates
  Quat q;                 // vision→camera frame transform
  double t = 0.0;
};

/// 6x6 covariance over [δp; δθ], with δp additive on p_v^c and δθ the
/// left-multiplicative small angle on q_v^c (measurement-noise coordinates).
using PoseCovariance = Mat6;

}  // namespace fpvio
