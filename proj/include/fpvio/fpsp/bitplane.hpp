#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace fpvio {

/// One pixel coordinate of the 256x256 array, x = column, y = row.
struct CornerEvent {
  int x = 0;
  int y = 0;
  friend bool operator==(const CornerEvent&, const CornerEvent&) = default;
};

/**
 * 256x256 binary register plane, packed 4 words per row. Mirrors the
 * digital-register readout of a focal-plane array: bits are set/tested
 * individually, events are the coordinates of set bits.
 */
class Bitplane256 {
 public:
  static constexpr int kSize = 256;

  void set(int x, int y) { words_[y * 4 + (x >> 6)] |= 1ULL << (x & 63); }
  void clear(int x, int y) { words_[y * 4 + (x >> 6)] &= ~(1ULL << (x & 63)); }
  void flip(int x, int y) { words_[y * 4 + (x >> 6)] ^= 1ULL << (x & 63); }

  bool get(int x, int y) const { return (words_[y * 4 + (x >> 6)] >> (x & 63)) & 1ULL; }

  /// In-bounds test plus read; out-of-bounds reads as 0.
  bool get_clamped(int x, int y) const {
    if (x < 0 || x >= kSize || y < 0 || y >= kSize) return false;
    return get(x, y);
  }

  int popcount() const;

  /// Coordinates of all set bits, row-major (y, then x).
  std::vector<CornerEvent> events() const;

  void reset() { words_.fill(0); }

  const std::array<std::uint64_t, 4 * kSize>& words() const { return words_; }

  friend bool operator==(const Bitplane256&, const Bitplane256&) = default;

 private:
  std::array<std::uint64_t, 4 * kSize> words_{};
};

/// Event readout of a plane (coordinates of set bits, row-major).
std::vector<CornerEvent> event_readout(const Bitplane256& plane);

}  // namespace fpvio
