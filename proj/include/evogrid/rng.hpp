#ifndef EVOGRID_RNG_HPP
#define EVOGRID_RNG_HPP

#include <cstdint>
#include <random>

namespace evogrid {

// Seeded stream with a fixed consumption contract: identical (seed, config)
// must reproduce trajectories bit-for-bit on any host. mt19937_64 output is
// pinned by the standard; the bounded draws are written out here because the
// stdlib distributions are implementation-defined.
class RngStream {
 public:
  explicit RngStream(uint64_t seed) : seed_(seed), gen_(seed) {}

  uint64_t seed() const { return seed_; }

  uint64_t next_u64() { return gen_(); }

  // Uniform over {0,1,2,3}; one engine draw.
  uint32_t below4() { return static_cast<uint32_t>(gen_() & 3); }

  bool bit() { return (gen_() & 1) != 0; }

  // Uniform over [0, n); unbiased via rejection.
  uint64_t below(uint64_t n) {
    if (n == 0) return 0;
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

  // 53-bit uniform in [0, 1).
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

 private:
  uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace evogrid

#endif
