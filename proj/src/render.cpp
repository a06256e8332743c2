#include "fpvio/fpsp/render.hpp"

#include <cmath>

#include "fpvio/core/geometry.hpp"
#include "fpvio/core/random.hpp"

namespace fpvio {
namespace {

int round_px(double v) { return static_cast<int>(std::floor(v + 0.5)); }

void draw_line(Bitplane256& plane, int x0, int y0, int x1, int y1) {
  // Classic Bresenham with per-pixel bounds check.
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  int x = x0, y = y0;
  for (;;) {
    if (x >= 0 && x < 256 && y >= 0 && y < 256) plane.set(x, y);
    if (x == x1 && y == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
  }
}

void apply_flip_noise(Bitplane256& plane, double p, Rng& rng) {
  if (p <= 0.0) return;
  // Geometric skipping over the 65536 bit positions.
  const double log1mp = std::log1p(-p);
  double pos = -1.0;
  for (;;) {
    double u;
    do {
      u = rng.uniform();
    } while (u <= 0.0);
    pos += 1.0 + std::floor(std::log(u) / log1mp);
    if (pos >= 65536.0) break;
    const int idx = static_cast<int>(pos);
    plane.flip(idx & 255, idx >> 8);
  }
}

}  // namespace

BinaryFrame render_binary_frame(const Scene& scene, const Pose& camera_pose,
                                const PinholeIntrinsics& intrinsics,
                                const RenderOptions& opts) {
  BinaryFrame frame;

  for (const auto& [a, b] : scene.segments) {
    Vec3 ca = pose_transform(camera_pose, a);
    Vec3 cb = pose_transform(camera_pose, b);
    if (ca.z() <= opts.min_depth && cb.z() <= opts.min_depth) continue;
    // Clip the behind-camera part at the near plane.
    if (ca.z() <= opts.min_depth || cb.z() <= opts.min_depth) {
      const double s = (opts.min_depth + 1e-6 - ca.z()) / (cb.z() - ca.z());
      const Vec3 cut = ca + s * (cb - ca);
      if (ca.z() <= opts.min_depth) {
        ca = cut;
      } else {
        cb = cut;
      }
    }
    const Vec2 pa = intrinsics.project(ca);
    const Vec2 pb = intrinsics.project(cb);
    // Skip wildly out-of-frame projections (near-plane grazing cases).
    if (std::max(std::fabs(pa.x()), std::fabs(pa.y())) > 4096.0) continue;
    if (std::max(std::fabs(pb.x()), std::fabs(pb.y())) > 4096.0) continue;
    draw_line(frame.edge_plane, round_px(pa.x()), round_px(pa.y()), round_px(pb.x()),
              round_px(pb.y()));
  }

  for (const Vec3& lm : scene.landmarks) {
    const Vec3 c = pose_transform(camera_pose, lm);
    if (c.z() <= opts.min_depth) continue;
    const Vec2 px = intrinsics.project(c);
    const int x = round_px(px.x()), y = round_px(px.y());
    if (x >= 0 && x < 256 && y >= 0 && y < 256) frame.corner_plane.set(x, y);
  }

  if (opts.p_flip > 0.0) {
    Rng rng(opts.seed);
    apply_flip_noise(frame.edge_plane, opts.p_flip, rng);
    apply_flip_noise(frame.corner_plane, opts.p_flip, rng);
  }
  return frame;
}

}  // namespace fpvio
