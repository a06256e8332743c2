#include "fpvio/fpsp/bitplane.hpp"

#include <bit>

namespace fpvio {

int Bitplane256::popcount() const {
  int n = 0;
  for (const auto w : words_) n += std::popcount(w);
  return n;
}

std::vector<CornerEvent> Bitplane256::events() const {
  std::vector<CornerEvent> out;
  out.reserve(256);
  for (int y = 0; y < kSize; ++y) {
    for (int wi = 0; wi < 4; ++wi) {
      std::uint64_t w = words_[y * 4 + wi];
      while (w) {
        const int bit = std::countr_zero(w);
        out.push_back({wi * 64 + bit, y});
        w &= w - 1;
      }
    }
  }
  return out;
}

std::vector<CornerEvent> event_readout(const Bitplane256& plane) { return plane.events(); }

}  // namespace fpvio
