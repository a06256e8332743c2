#pragma once

#include <cstdint>
#include <vector>

#include "fpvio/core/types.hpp"

namespace fpvio {

/// Wireframe world: corner landmarks plus 3D edge segments.
struct Scene {
  std::vector<Vec3> landmarks;
  std::vector<std::pair<Vec3, Vec3>> segments;
};

}  // namespace fpvio
