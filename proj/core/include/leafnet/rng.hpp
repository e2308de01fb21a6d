#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace leafnet {

// Seeded random stream. All randomness in the library flows through an
// explicit Rng so runs are reproducible; the uniform transforms are written
// out by hand because std::uniform_*_distribution output is
// implementation-defined and would break cross-toolchain determinism.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n). Modulo bias is negligible for n far below 2^64.
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

  // Fisher-Yates.
  template <typename It>
  void shuffle(It first, It last) {
    const std::size_t n = static_cast<std::size_t>(last - first);
    for (std::size_t i = n; i > 1; --i) {
      std::swap(first[i - 1], first[index(i)]);
    }
  }

  std::string serialize() const {
    std::ostringstream oss;
    oss << engine_;
    return oss.str();
  }

  void restore(const std::string& state) {
    std::istringstream iss(state);
    iss >> engine_;
    if (iss.fail()) throw std::invalid_argument("Rng::restore: malformed state string");
  }

  // SplitMix64-style combiner for deriving independent sub-stream seeds,
  // e.g. the per-epoch shuffle seed from (base seed, epoch).
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace leafnet
