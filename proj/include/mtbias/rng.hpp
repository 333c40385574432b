#pragma once

// Portable seeded randomness.
//
// The draw protocol is fixed so that selections reproduce across standard
// libraries: the engine is std::mt19937_64 (its output sequence is defined by
// the standard), and bounded draws use rejection sampling on the raw 64-bit
// output instead of std::uniform_int_distribution, whose algorithm is
// implementation-defined.
//
//   below(n): draw x until x < 2^64 - (2^64 mod n); return x mod n
//   coin():   top bit of one raw draw

#include <cstdint>
#include <random>

#include "mtbias/error.hpp"

namespace mtbias {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Sub-seed for stream `index` of a master seed.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw DomainError("Rng::below(0)");
    // 2^64 mod n, computed without overflow.
    const std::uint64_t rem = (0 - n) % n;
    const std::uint64_t limit = 0 - rem;  // 2^64 - rem (0 means "accept all")
    while (true) {
      const std::uint64_t x = engine_();
      if (limit == 0 || x < limit) return x % n;
    }
  }

  bool coin() { return (engine_() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mtbias
