#ifndef STA_RNG_H_
#define STA_RNG_H_

#include <cstdint>
#include <random>

namespace sta {

// Seeded generator with draws defined only in terms of the raw mt19937_64
// output sequence, so results do not depend on the standard library's
// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }
  // Uniform integer in [0, bound). `bound` must be positive.
  std::uint64_t UniformInt(std::uint64_t bound);
  // Uniform double in [0, 1) with 53 random bits.
  double UniformDouble();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * UniformDouble(); }
  bool FairBit() { return (NextU64() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 mix of (seed, stream); used to derive independent per-user and
// per-image seeds from one root seed.
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream);

}  // namespace sta

#endif  // STA_RNG_H_
