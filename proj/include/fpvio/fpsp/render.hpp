#pragma once

#include <cstdint>

#include "fpvio/fpsp/frame.hpp"
#include "fpvio/sim/scene.hpp"

namespace fpvio {

struct RenderOptions {
  double p_flip = 0.0;        // per-bit flip probability on both planes
  std::uint64_t seed = 0;     // flip-noise stream seed
  double min_depth = 0.05;    // camera-frame z culling threshold, m
};

/**
 * Projects the wireframe scene into binary planes: segments rasterize to the
 * edge plane (Bresenham, 1 px wide), landmarks set corner-plane bits at their
 * rounded projections. Deterministic for fixed inputs and seed.
 */
BinaryFrame render_binary_frame(const Scene& scene, const Pose& camera_pose,
                                const PinholeIntrinsics& intrinsics,
                                const RenderOptions& opts = {});

}  // namespace fpvio
