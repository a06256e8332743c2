#pragma once

#include <cstdint>
#include <vector>

#include "fpvio/fpsp/frame.hpp"

namespace fpvio {

/**
 * 44-bit ring descriptor around a corner, built from the binary edge plane
 * of a rotated 7x7 patch.
 *
 * Bit order (frozen): ring r1 = 8 positions on the radius-1 ring (bits 0-7),
 * r2 = 16 positions on the radius-2 ring (bits 8-23), r3 = 20 positions on
 * the radius-3 ring (bits 24-43); each ring equally spaced in angle,
 * counter-clockwise from +x, which keeps the layout rotation-covariant. The
 * patch is derotated by the orientation before sampling, i.e. the sampling
 * coordinates are rotated forward by it (nearest neighbor).
 */
struct BitDescriptor {
  std::uint64_t bits = 0;  // low 44 bits defined
  CornerEvent anchor;
  double orientation = 0.0;  // [0, 2π)

  static constexpr int kBits = 44;
  static constexpr std::uint64_t kMask = (1ULL << 44) - 1;
};

/**
 * Binary FAST segment test: a corner-plane candidate survives iff at least 9
 * contiguous pixels on the 16-pixel radius-3 circle of the edge plane differ
 * from the center edge bit. 3x3 non-maximum suppression by contiguous-arc
 * length, ties broken by row-major order.
 */
std::vector<CornerEvent> detect_corners(const BinaryFrame& frame);

/// Longest contiguous differing arc on the 16-pixel circle (0 if none).
int segment_test_score(const Bitplane256& edge_plane, int x, int y);

/// Throws "patch out of bounds" for corners closer than 3 px to a border.
BitDescriptor extract_descriptor(const BinaryFrame& frame, const CornerEvent& corner);

/// Population count of XOR over the 44 defined bits.
int hamming_distance(const BitDescriptor& a, const BitDescriptor& b);

}  // namespace fpvio
