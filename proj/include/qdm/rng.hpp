#ifndef QDM_RNG_HPP
#define QDM_RNG_HPP

#include <cmath>
#include <cstdint>

namespace qdm {

/// splitmix64 — stable across platforms, used to derive per-pixel substreams.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Tiny deterministic normal sampler (xoshiro-free: splitmix64 + Box-Muller).
/// Bit-identical output regardless of platform, compiler, or threading, so
/// per-pixel substreams reproduce exactly.
class GaussianStream {
public:
  explicit GaussianStream(uint64_t seed) : state_(seed) {}

  /// Derive an independent substream for (seed, stream_id).
  static GaussianStream substream(uint64_t seed, uint64_t stream_id) {
    uint64_t s = seed;
    uint64_t mixed = splitmix64(s) ^ (0x9e3779b97f4a7c15ULL * (stream_id + 1));
    return GaussianStream(mixed);
  }

  double uniform() {  // in (0, 1]
    const uint64_t r = splitmix64(state_);
    return ((r >> 11) + 1.0) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

private:
  uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace qdm

#endif
