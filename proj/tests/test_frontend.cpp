#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fpvio/core/geometry.hpp"
#include "fpvio/core/random.hpp"
#include "fpvio/fpsp/features.hpp"
#include "fpvio/fpsp/render.hpp"

using namespace fpvio;

namespace {

void draw_px_line(Bitplane256& plane, int x0, int y0, int x1, int y1) {
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy, x = x0, y = y0;
  for (;;) {
    if (x >= 0 && x < 256 && y >= 0 && y < 256) plane.set(x, y);
    if (x == x1 && y == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) { err += dy; x += sx; }
    if (e2 <= dx) { err += dx; y += sy; }
  }
}

// Star pattern: rays from a center pixel at given angles, drawn at base+theta.
void draw_star(BinaryFrame& frame, int cx, int cy, const std::vector<double>& angles,
               const std::vector<double>& lengths, double theta) {
  for (size_t i = 0; i < angles.size(); ++i) {
    const double a = angles[i] + theta;
    const int ex = cx + static_cast<int>(std::lround(lengths[i] * std::cos(a)));
    const int ey = cy + static_cast<int>(std::lround(lengths[i] * std::sin(a)));
    draw_px_line(frame.edge_plane, cx, cy, ex, ey);
  }
  frame.corner_plane.set(cx, cy);
}

// Junction-style patch: segments given as polar endpoint pairs around the
// center, redrawn rotated by theta.
struct PolarSegment {
  double r0, a0, r1, a1;
};

void draw_patch(BinaryFrame& frame, int cx, int cy, const std::vector<PolarSegment>& segs,
                double theta) {
  for (const auto& s : segs) {
    const int x0 = cx + static_cast<int>(std::lround(s.r0 * std::cos(s.a0 + theta)));
    const int y0 = cy + static_cast<int>(std::lround(s.r0 * std::sin(s.a0 + theta)));
    const int x1 = cx + static_cast<int>(std::lround(s.r1 * std::cos(s.a1 + theta)));
    const int y1 = cy + static_cast<int>(std::lround(s.r1 * std::sin(s.a1 + theta)));
    draw_px_line(frame.edge_plane, x0, y0, x1, y1);
  }
  frame.corner_plane.set(cx, cy);
}

}  // namespace

TEST_CASE("event readout") {
  Bitplane256 plane;
  CHECK(event_readout(plane).empty());

  plane.set(3, 7);
  plane.set(200, 11);
  const auto ev = event_readout(plane);
  REQUIRE(ev.size() == 2);
  CHECK(ev[0] == CornerEvent{3, 7});
  CHECK(ev[1] == CornerEvent{200, 11});

  // Random plane against a naive double-loop count, plus row-major order.
  Rng rng(41);
  Bitplane256 r;
  for (int i = 0; i < 500; ++i)
    r.set(static_cast<int>(rng.index(256)), static_cast<int>(rng.index(256)));
  int naive = 0;
  for (int y = 0; y < 256; ++y)
    for (int x = 0; x < 256; ++x)
      if (r.get(x, y)) ++naive;
  const auto rev = r.events();
  CHECK(static_cast<int>(rev.size()) == naive);
  CHECK(static_cast<int>(rev.size()) == r.popcount());
  for (size_t i = 1; i < rev.size(); ++i) {
    CHECK((rev[i - 1].y < rev[i].y ||
           (rev[i - 1].y == rev[i].y && rev[i - 1].x < rev[i].x)));
  }

  // Set-bits then readout is the identity on coordinate sets.
  Bitplane256 p2;
  for (const auto& e : rev) p2.set(e.x, e.y);
  CHECK(p2 == r);
}

TEST_CASE("render binary frame") {
  PinholeIntrinsics k;

  SUBCASE("empty scene gives all-zero planes") {
    const BinaryFrame f = render_binary_frame(Scene{}, Pose{}, k);
    CHECK(f.edge_plane.popcount() == 0);
    CHECK(f.corner_plane.popcount() == 0);
  }

  SUBCASE("on-axis landmark hits the principal point") {
    Scene s;
    s.landmarks.push_back(Vec3(0, 0, 1));
    const BinaryFrame f = render_binary_frame(s, Pose{}, k);
    CHECK(f.corner_plane.popcount() == 1);
    CHECK(f.corner_plane.get(127, 128));  // round(127.44), round(128.17)
  }

  SUBCASE("landmark behind the camera is culled") {
    Scene s;
    s.landmarks.push_back(Vec3(0, 0, -1));
    s.landmarks.push_back(Vec3(0.02, 0, 0.04));  // closer than the near plane
    const BinaryFrame f = render_binary_frame(s, Pose{}, k);
    CHECK(f.corner_plane.popcount() == 0);
  }

  SUBCASE("deterministic per seed") {
    Scene s;
    Rng rng(5);
    for (int i = 0; i < 40; ++i)
      s.segments.push_back({Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), 2.0),
                            Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), 2.5)});
    RenderOptions opts;
    opts.p_flip = 1e-3;
    opts.seed = 99;
    const BinaryFrame a = render_binary_frame(s, Pose{}, k, opts);
    const BinaryFrame b = render_binary_frame(s, Pose{}, k, opts);
    CHECK(a.edge_plane == b.edge_plane);
    CHECK(a.corner_plane == b.corner_plane);
    opts.seed = 100;
    const BinaryFrame c = render_binary_frame(s, Pose{}, k, opts);
    CHECK(!(c.edge_plane == a.edge_plane));
  }
}

TEST_CASE("detect corners") {
  SUBCASE("empty frame") {
    CHECK(detect_corners(BinaryFrame{}).empty());
  }

  SUBCASE("all-ones frame has no contrast") {
    BinaryFrame f;
    for (int y = 0; y < 256; ++y)
      for (int x = 0; x < 256; ++x) {
        f.edge_plane.set(x, y);
        f.corner_plane.set(x, y);
      }
    CHECK(detect_corners(f).empty());
  }

  SUBCASE("L junction yields exactly one corner") {
    BinaryFrame f;
    draw_px_line(f.edge_plane, 100, 100, 112, 100);
    draw_px_line(f.edge_plane, 100, 100, 100, 112);
    // Candidates at the junction and along both edges.
    f.corner_plane.set(100, 100);
    f.corner_plane.set(101, 100);
    f.corner_plane.set(100, 101);
    f.corner_plane.set(105, 100);
    const auto corners = detect_corners(f);
    REQUIRE(corners.size() == 1);
    CHECK(corners[0] == CornerEvent{100, 100});

    // Exhaustive oracle over the patch: naive circular-arc scoring at every
    // candidate, followed by the same 3x3 suppression rule.
    const int circle[16][2] = {{3, 0},  {3, 1},  {2, 2},   {1, 3},   {0, 3},   {-1, 3},
                               {-2, 2}, {-3, 1}, {-3, 0},  {-3, -1}, {-2, -2}, {-1, -3},
                               {0, -3}, {1, -3}, {2, -2},  {3, -1}};
    auto naive_score = [&](int x, int y) {
      const bool center = f.edge_plane.get(x, y);
      std::vector<int> diff;
      for (int i = 0; i < 16; ++i)
        diff.push_back(f.edge_plane.get_clamped(x + circle[i][0], y + circle[i][1]) !=
                       center);
      int best = 0;
      for (int start = 0; start < 16; ++start) {
        int run = 0;
        for (int i = 0; i < 16; ++i) {
          if (diff[(start + i) % 16]) {
            ++run;
          } else {
            break;
          }
        }
        best = std::max(best, run);
      }
      return best;
    };
    std::vector<CornerEvent> oracle;
    for (int y = 90; y <= 120; ++y) {
      for (int x = 90; x <= 120; ++x) {
        if (!f.corner_plane.get(x, y)) continue;
        const int s = naive_score(x, y);
        if (s < 9) continue;
        bool keep = true;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            if (!f.corner_plane.get(x + dx, y + dy)) continue;
            const int ns = naive_score(x + dx, y + dy);
            if (ns < 9) continue;
            if (ns > s || (ns == s && (dy < 0 || (dy == 0 && dx < 0)))) keep = false;
          }
        if (keep) oracle.push_back({x, y});
      }
    }
    REQUIRE(oracle.size() == corners.size());
    for (size_t i = 0; i < oracle.size(); ++i) CHECK(oracle[i] == corners[i]);
  }

  SUBCASE("translation equivariance") {
    Rng rng(43);
    BinaryFrame f;
    for (int i = 0; i < 10; ++i) {
      const int cx = 30 + static_cast<int>(rng.index(150));
      const int cy = 30 + static_cast<int>(rng.index(150));
      draw_star(f, cx, cy, {rng.uniform(0, 2 * M_PI), rng.uniform(0, 2 * M_PI)}, {6, 6}, 0.0);
    }
    const int dx = 17, dy = -9;
    BinaryFrame g;
    for (const auto e : f.edge_plane.events()) g.edge_plane.set(e.x + dx, e.y + dy);
    for (const auto e : f.corner_plane.events()) g.corner_plane.set(e.x + dx, e.y + dy);

    auto a = detect_corners(f);
    auto b = detect_corners(g);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
      CHECK(b[i].x == a[i].x + dx);
      CHECK(b[i].y == a[i].y + dy);
    }
  }
}

TEST_CASE("descriptor extraction") {
  SUBCASE("all-zero patch") {
    BinaryFrame f;
    const BitDescriptor d = extract_descriptor(f, {100, 100});
    CHECK(d.bits == 0);
    CHECK(d.orientation == 0.0);
  }

  SUBCASE("all-ones patch") {
    BinaryFrame f;
    for (int y = 0; y < 256; ++y)
      for (int x = 0; x < 256; ++x) f.edge_plane.set(x, y);
    const BitDescriptor d = extract_descriptor(f, {100, 100});
    CHECK(d.bits == BitDescriptor::kMask);
  }

  SUBCASE("border corner rejected") {
    BinaryFrame f;
    CHECK_THROWS_WITH_AS(extract_descriptor(f, {2, 100}), "patch out of bounds",
                         std::runtime_error);
    CHECK_THROWS_WITH_AS(extract_descriptor(f, {100, 253}), "patch out of bounds",
                         std::runtime_error);
  }

  SUBCASE("90 degree rotation invariance") {
    const std::vector<double> angles = {0.3, 1.9};
    const std::vector<double> lengths = {6, 5};
    BinaryFrame a, b;
    draw_star(a, 100, 100, angles, lengths, 0.0);
    draw_star(b, 100, 100, angles, lengths, M_PI / 2);
    const BitDescriptor da = extract_descriptor(a, {100, 100});
    const BitDescriptor db = extract_descriptor(b, {100, 100});
    CHECK(hamming_distance(da, db) <= 2);
  }

  SUBCASE("rotation robustness over 100 patches x 11 rotations") {
    // Junction-style patches; the rotated views come from an exact
    // nearest-neighbor image rotation of the patch pixels about the corner.
    Rng rng(47);
    std::vector<int> distances;
    for (int p = 0; p < 100; ++p) {
      std::vector<PolarSegment> segs;
      const double a0 = rng.uniform(0, 2 * M_PI);
      const double sep = rng.uniform(0.9, 2.3);
      segs.push_back({0, 0, rng.uniform(5.0, 9.0), a0});
      segs.push_back({0, 0, rng.uniform(5.0, 9.0), a0 + sep});
      if (rng.uniform() < 0.5) {
        const double cr = rng.uniform(2.0, 3.5), ca = rng.uniform(0, 2 * M_PI);
        segs.push_back({cr, ca, cr + rng.uniform(2.0, 4.0), ca + rng.uniform(-0.8, 0.8)});
      }
      BinaryFrame base;
      draw_patch(base, 128, 128, segs, 0.0);
      const BitDescriptor d0 = extract_descriptor(base, {128, 128});
      const auto base_events = base.edge_plane.events();
      for (int k = 1; k <= 11; ++k) {
        const double th = k * M_PI / 6.0;
        const double c = std::cos(th), s = std::sin(th);
        BinaryFrame rot;
        for (const auto& e : base_events) {
          const double dx = e.x - 128, dy = e.y - 128;
          rot.edge_plane.set(128 + static_cast<int>(std::lround(c * dx - s * dy)),
                             128 + static_cast<int>(std::lround(s * dx + c * dy)));
        }
        const BitDescriptor dk = extract_descriptor(rot, {128, 128});
        distances.push_back(hamming_distance(d0, dk));
      }
      CHECK(hamming_distance(d0, d0) == 0);
    }
    std::sort(distances.begin(), distances.end());
    const int median = distances[distances.size() / 2];
    INFO("median rotated hamming = " << median);
    CHECK(median <= 4);
  }
}

TEST_CASE("hamming distance") {
  Rng rng(53);
  BitDescriptor a, b;
  a.bits = rng.index(1ULL << 44);
  CHECK(hamming_distance(a, a) == 0);
  b.bits = ~a.bits & BitDescriptor::kMask;
  CHECK(hamming_distance(a, b) == 44);

  for (int i = 0; i < 200; ++i) {
    BitDescriptor x, y, z;
    x.bits = rng.index(1ULL << 44);
    y.bits = rng.index(1ULL << 44);
    z.bits = rng.index(1ULL << 44);
    // Naive per-bit oracle.
    int naive = 0;
    for (int k = 0; k < 44; ++k)
      if (((x.bits >> k) & 1) != ((y.bits >> k) & 1)) ++naive;
    CHECK(hamming_distance(x, y) == naive);
    CHECK(hamming_distance(x, y) == hamming_distance(y, x));
    CHECK(hamming_distance(x, z) <= hamming_distance(x, y) + hamming_distance(y, z));
  }
}
