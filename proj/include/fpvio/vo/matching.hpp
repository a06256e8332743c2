#pragma once

#include <utility>
#include <vector>

#include "fpvio/vo/types.hpp"

namespace fpvio {

/// A reference entry: predicted pixel plus descriptor.
struct MatchReference {
  Vec2 pixel = Vec2::Zero();
  BitDescriptor descriptor;
};

inline constexpr int kMatchMaxHamming = 12;
inline constexpr int kMatchDefaultRadius = 4;

/**
 * Brute-force search-and-match around a small pixel radius: each current
 * feature takes the reference within Chebyshev `radius` minimizing Hamming
 * distance, accepted iff <= 12, one-to-one via a mutual-best check. Ties
 * break on (distance, row-major pixel). Returns (current, reference) index
 * pairs ordered by current index.
 */
std::vector<std::pair<int, int>> match_features(const std::vector<Feature>& current,
                                                const std::vector<MatchReference>& reference,
                                                int radius = kMatchDefaultRadius);

}  // namespace fpvio
