#pragma once

#include "fpvio/core/types.hpp"
#include "fpvio/fpsp/bitplane.hpp"

namespace fpvio {

/// Pinhole camera over the fixed 256x256 array.
struct PinholeIntrinsics {
  double fx = 257.27;
  double fy = 258.00;
  double cx = 127.44;
  double cy = 128.17;

  Vec2 project(const Vec3& x_cam) const {
    return {fx * x_cam.x() / x_cam.z() + cx, fy * x_cam.y() / x_cam.z() + cy};
  }

  /// Unit-depth ray (z = 1) for a pixel.
  Vec3 unproject(const Vec2& px) const {
    return {(px.x() - cx) / fx, (px.y() - cy) / fy, 1.0};
  }
};

/// One simulated sensor output: binary edge and corner planes at time t.
struct BinaryFrame {
  double t = 0.0;
  Bitplane256 edge_plane;
  Bitplane256 corner_plane;
};

}  // namespace fpvio
