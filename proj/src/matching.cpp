#include "fpvio/vo/matching.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>

namespace fpvio {
namespace {

// Grid buckets over pixel space for radius queries.
class PixelGrid {
 public:
  explicit PixelGrid(int cell) : cell_(cell) {}

  void insert(double x, double y, int idx) {
    grid_[key(static_cast<int>(std::floor(x / cell_)),
              static_cast<int>(std::floor(y / cell_)))].push_back(idx);
  }

  template <typename Fn>
  void for_each_near(double x, double y, double radius, Fn&& fn) const {
    const int cx0 = static_cast<int>(std::floor((x - radius) / cell_));
    const int cx1 = static_cast<int>(std::floor((x + radius) / cell_));
    const int cy0 = static_cast<int>(std::floor((y - radius) / cell_));
    const int cy1 = static_cast<int>(std::floor((y + radius) / cell_));
    for (int cy = cy0; cy <= cy1; ++cy) {
      for (int cx = cx0; cx <= cx1; ++cx) {
        const auto it = grid_.find(key(cx, cy));
        if (it == grid_.end()) continue;
        for (const int idx : it->second) fn(idx);
      }
    }
  }

 private:
  static std::int64_t key(int cx, int cy) {
    return (static_cast<std::int64_t>(cx) << 32) ^ (cy & 0xffffffffLL);
  }
  int cell_;
  std::unordered_map<std::int64_t, std::vector<int>> grid_;
};

struct Best {
  int idx = -1;
  int dist = 1 << 20;
  double row = 0, col = 0;  // tie-break pixel of the counterpart
};

bool better(int dist, double y, double x, const Best& cur) {
  if (dist != cur.dist) return dist < cur.dist;
  if (y != cur.row) return y < cur.row;
  return x < cur.col;
}

}  // namespace

std::vector<std::pair<int, int>> match_features(const std::vector<Feature>& current,
                                                const std::vector<MatchReference>& reference,
                                                int radius) {
  if (radius < 1 || radius > 10) throw std::invalid_argument("radius out of range");
  if (current.empty() || reference.empty()) return {};

  PixelGrid ref_grid(radius);
  for (size_t j = 0; j < reference.size(); ++j)
    ref_grid.insert(reference[j].pixel.x(), reference[j].pixel.y(), static_cast<int>(j));

  // Best reference for each current feature.
  std::vector<Best> best_ref(current.size());
  for (size_t i = 0; i < current.size(); ++i) {
    const auto& f = current[i];
    ref_grid.for_each_near(f.event.x, f.event.y, radius, [&](int j) {
      const auto& r = reference[j];
      if (std::fabs(r.pixel.x() - f.event.x) > radius) return;
      if (std::fabs(r.pixel.y() - f.event.y) > radius) return;
      const int d = hamming_distance(f.descriptor, r.descriptor);
      if (d > kMatchMaxHamming) return;
      if (better(d, r.pixel.y(), r.pixel.x(), best_ref[i]))
        best_ref[i] = {j, d, r.pixel.y(), r.pixel.x()};
    });
  }

  // Best current feature for each reference, over everything in radius.
  PixelGrid cur_grid(radius);
  for (size_t i = 0; i < current.size(); ++i)
    cur_grid.insert(current[i].event.x, current[i].event.y, static_cast<int>(i));
  std::vector<Best> best_cur(reference.size());
  for (size_t j = 0; j < reference.size(); ++j) {
    const auto& r = reference[j];
    cur_grid.for_each_near(r.pixel.x(), r.pixel.y(), radius, [&](int i) {
      const auto& f = current[i];
      if (std::fabs(r.pixel.x() - f.event.x) > radius) return;
      if (std::fabs(r.pixel.y() - f.event.y) > radius) return;
      const int d = hamming_distance(f.descriptor, r.descriptor);
      if (d > kMatchMaxHamming) return;
      if (better(d, f.event.y, f.event.x, best_cur[j]))
        best_cur[j] = {i, d, static_cast<double>(f.event.y), static_cast<double>(f.event.x)};
    });
  }

  std::vector<std::pair<int, int>> out;
  for (size_t i = 0; i < current.size(); ++i) {
    const int j = best_ref[i].idx;
    if (j >= 0 && best_cur[j].idx == static_cast<int>(i))
      out.push_back({static_cast<int>(i), j});
  }
  return out;
}

}  // namespace fpvio
