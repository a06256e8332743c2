#include "fpvio/fpsp/features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace fpvio {
namespace {

// Bresenham circle of radius 3, counter-clockwise in image coordinates
// starting at (+3, 0).
constexpr int kCircle[16][2] = {{3, 0},  {3, 1},  {2, 2},   {1, 3},   {0, 3},   {-1, 3},
                                {-2, 2}, {-3, 1}, {-3, 0},  {-3, -1}, {-2, -2}, {-1, -3},
                                {0, -3}, {1, -3}, {2, -2},  {3, -1}};

struct RingTables {
  // 44 sampling offsets in descriptor bit order.
  double dx[44];
  double dy[44];
};

RingTables make_ring_tables() {
  RingTables t{};
  int n = 0;
  auto add_ring = [&](double radius, int count) {
    for (int i = 0; i < count; ++i) {
      const double ang = 2.0 * M_PI * i / count;
      t.dx[n] = radius * std::cos(ang);
      t.dy[n] = radius * std::sin(ang);
      ++n;
    }
  };
  add_ring(1.0, 8);
  add_ring(2.0, 16);
  add_ring(3.0, 20);
  return t;
}

const RingTables kRings = make_ring_tables();

}  // namespace

int segment_test_score(const Bitplane256& edge_plane, int x, int y) {
  const bool center = edge_plane.get_clamped(x, y);
  unsigned mask = 0;
  for (int i = 0; i < 16; ++i) {
    const int px = x + kCircle[i][0], py = y + kCircle[i][1];
    // Only in-bounds pixels can testify.
    if (px < 0 || px >= 256 || py < 0 || py >= 256) continue;
    if (edge_plane.get(px, py) != center) mask |= 1u << i;
  }
  if (mask == 0xffff) return 16;
  // Longest run of ones on the 16-bit ring (wraparound via doubling).
  unsigned ext = mask | (mask << 16);
  int best = 0, run = 0;
  for (int i = 0; i < 32; ++i) {
    if (ext & (1u << i)) {
      ++run;
      best = std::max(best, run);
    } else {
      run = 0;
    }
  }
  return std::min(best, 16);
}

std::vector<CornerEvent> detect_corners(const BinaryFrame& frame) {
  const std::vector<CornerEvent> candidates = frame.corner_plane.events();
  if (candidates.empty()) return {};

  // Scores only where candidates exist; a sparse map keyed by coordinate.
  std::vector<int> score(candidates.size());
  std::vector<int> score_at(65536, -1);
  for (size_t i = 0; i < candidates.size(); ++i) {
    score[i] = segment_test_score(frame.edge_plane, candidates[i].x, candidates[i].y);
    if (score[i] >= 9) score_at[candidates[i].y * 256 + candidates[i].x] = score[i];
  }

  std::vector<CornerEvent> out;
  for (size_t i = 0; i < candidates.size(); ++i) {
    if (score[i] < 9) continue;
    const auto [cx, cy] = candidates[i];
    bool suppressed = false;
    for (int dy = -1; dy <= 1 && !suppressed; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int nx = cx + dx, ny = cy + dy;
        if (nx < 0 || nx >= 256 || ny < 0 || ny >= 256) continue;
        const int ns = score_at[ny * 256 + nx];
        if (ns < 0) continue;
        // Row-major earlier wins ties.
        if (ns > score[i] || (ns == score[i] && (ny < cy || (ny == cy && nx < cx)))) {
          suppressed = true;
          break;
        }
      }
    }
    if (!suppressed) out.push_back(candidates[i]);
  }
  return out;
}

BitDescriptor extract_descriptor(const BinaryFrame& frame, const CornerEvent& corner) {
  if (corner.x < 3 || corner.x > 252 || corner.y < 3 || corner.y > 252)
    throw std::runtime_error("patch out of bounds");

  BitDescriptor d;
  d.anchor = corner;

  // Orientation from the binary-mass centroid of the patch, over the
  // inscribed disk so the support is rotation-invariant.
  double mx = 0.0, my = 0.0;
  int count = 0;
  for (int dy = -3; dy <= 3; ++dy) {
    for (int dx = -3; dx <= 3; ++dx) {
      if (dx * dx + dy * dy > 10) continue;
      if (frame.edge_plane.get(corner.x + dx, corner.y + dy)) {
        mx += dx;
        my += dy;
        ++count;
      }
    }
  }
  if (count == 0 || (std::fabs(mx) < 1e-12 && std::fabs(my) < 1e-12)) {
    d.orientation = 0.0;
  } else {
    d.orientation = std::atan2(my, mx);
    if (d.orientation < 0) d.orientation += 2.0 * M_PI;
  }

  // Derotating the patch by the orientation equals rotating the sampling
  // coordinates forward by it.
  const double c = std::cos(d.orientation), s = std::sin(d.orientation);
  for (int i = 0; i < BitDescriptor::kBits; ++i) {
    double rx = c * kRings.dx[i] - s * kRings.dy[i];
    double ry = s * kRings.dx[i] + c * kRings.dy[i];
    // Clamp into the patch so the 3 px border precondition stays sufficient.
    int ix = static_cast<int>(std::lround(rx));
    int iy = static_cast<int>(std::lround(ry));
    ix = std::clamp(ix, -3, 3);
    iy = std::clamp(iy, -3, 3);
    if (frame.edge_plane.get(corner.x + ix, corner.y + iy)) d.bits |= 1ULL << i;
  }
  return d;
}

int hamming_distance(const BitDescriptor& a, const BitDescriptor& b) {
  return std::popcount((a.bits ^ b.bits) & BitDescriptor::kMask);
}

}  // namespace fpvio
