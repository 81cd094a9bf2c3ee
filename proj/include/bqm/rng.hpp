// Deterministic sampling stream. All structure checks draw from this
// wrapper instead of <random> distributions, whose output is
// implementation-defined; the raw mt19937_64 stream plus our own
// uniform mapping gives bit-stable samples for a given seed.
#pragma once

#include <cstdint>
#include <random>

namespace bqm {

class SampleRng {
 public:
  explicit SampleRng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double next01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next01(); }

  /// Uniform integer in [0, n). Multiply-shift bound; bias is far below
  /// anything a sampling check can observe and the stream stays stable.
  int below(int n) {
    const unsigned __int128 wide =
        static_cast<unsigned __int128>(gen_()) * static_cast<unsigned>(n);
    return static_cast<int>(wide >> 64);
  }

  bool coin() { return (gen_() & 1u) != 0; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace bqm
