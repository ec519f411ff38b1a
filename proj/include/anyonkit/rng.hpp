#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace anyonkit {

// Counter-split deterministic RNG. Substream i of a run seed is
// splitmix64 seeded with mix(seed) ^ mix(golden * (i + 1)), so adding
// shots never perturbs the outcomes of earlier shots.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(mix64(seed)) {}

  static RngStream substream(std::uint64_t seed, std::uint64_t counter) {
    return RngStream(mix64(seed) ^ mix64(0x9e3779b97f4a7c15ull * (counter + 1)));
  }

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Sample an index from non-negative weights (need not be normalized).
  template <typename Real>
  int sampleIndex(const std::vector<Real>& weights) {
    Real total = 0;
    for (Real w : weights) total += w;
    Real r = static_cast<Real>(uniform()) * total;
    Real acc = 0;
    int last = 0;
    for (int i = 0; i < static_cast<int>(weights.size()); ++i) {
      if (weights[i] <= 0) continue;
      acc += weights[i];
      last = i;
      if (r < acc) return i;
    }
    return last;
  }

 private:
  static std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace anyonkit
