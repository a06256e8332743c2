#pragma once

#include <cstdint>
#include <random>

#include "fpvio/core/types.hpp"

namespace fpvio {

/**
 * Seeded RNG with a platform-independent gaussian (Box-Muller over
 * uniform doubles), so identical seeds give bitwise-identical streams.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() {  // [0, 1)
    return (engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n) { return engine_() % n; }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  Vec3 gaussian_vec3() { return {gaussian(), gaussian(), gaussian()}; }

  /// Random unit quaternion (uniform on SO(3)).
  Quat unit_quaternion() {
    const double u1 = uniform(), u2 = uniform(), u3 = uniform();
    const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
    return {b * std::cos(2.0 * M_PI * u3), a * std::sin(2.0 * M_PI * u2),
            a * std::cos(2.0 * M_PI * u2), b * std::sin(2.0 * M_PI * u3)};
  }

  /// Derive an independent sub-stream seed (for per-frame / per-run use).
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t h = seed ^ (0x9e3779b97f4a7c15ULL + salt);
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 27;
    h *= 0x94d049bb133111ebULL;
    h ^= h >> 31;
    return h;
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fpvio
