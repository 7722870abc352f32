#pragma once

#include <cstdint>

namespace sle0::detail {

// splitmix64: tiny, seed-reproducible across platforms and library versions,
// which std::uniform_real_distribution is not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // symmetric triangular-ish perturbation in [-s, s]
  double centered(double s) { return s * (uniform() + uniform() - 1.0); }

 private:
  std::uint64_t state_;
};

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  Rng r(a * 0x9e3779b97f4a7c15ULL + b + 1);
  return r.next_u64();
}

}  // namespace sle0::detail
