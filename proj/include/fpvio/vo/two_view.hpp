#pragma once

#include <cstdint>
#include <vector>

#include "fpvio/fpsp/frame.hpp"
#include "fpvio/vo/types.hpp"

namespace fpvio {

struct InitOptions {
  int match_radius = 10;           // px, correspondence search across the pair
  int min_matches = 30;
  double min_parallax_px = 1.5;    // median triangulation angle, in pixels
  double ransac_threshold_px = 1.5;
  int ransac_iterations = 250;
  double min_inlier_ratio = 0.5;
  std::uint64_t seed = 12345;
};

struct TwoViewInit {
  Pose relative;                      // pose of the second camera in the first frame,
                                      // ‖p‖ = 1 (fixes the monocular scale unit)
  std::vector<MapPoint> points;       // triangulated inliers, first-camera frame
  std::vector<std::pair<int, int>> inlier_matches;  // (frame0, frame1) feature indices
  double median_parallax_px = 0.0;
};

/**
 * Two-view bootstrap: descriptor matching across the pair, essential matrix
 * by normalized 8-point inside RANSAC, cheirality-checked decomposition and
 * triangulation of the inliers.
 *
 * Throws std::invalid_argument("insufficient matches") below min_matches,
 * std::runtime_error("insufficient parallax") when the derotated median
 * parallax is under min_parallax_px, and std::runtime_error
 * ("initialization failed") when the inlier ratio is below min_inlier_ratio.
 */
TwoViewInit initialize_map(const std::vector<Feature>& frame0,
                           const std::vector<Feature>& frame1,
                           const PinholeIntrinsics& intrinsics,
                           const InitOptions& opts = {});

/**
 * Midpoint triangulation of two pixel observations. Throws
 * "degenerate rays" (angle < 0.2 deg or coincident centers) and
 * "negative depth".
 */
Vec3 triangulate(const Pose& pose0, const Pose& pose1, const Vec2& px0, const Vec2& px1,
                 const PinholeIntrinsics& intrinsics);

}  // namespace fpvio
