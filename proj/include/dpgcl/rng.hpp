#pragma once

#include <cstdint>
#include <random>

namespace dpgcl {

// Every source of randomness in the project draws from a stream keyed by
// (purpose, seed, step, extra...). Streams with different purposes never
// overlap even when they share seed and step; this keeps subsampling,
// grouping, noise, and augmentation independent of each other.
enum class StreamKind : std::uint64_t {
  kDataGen = 1,
  kInit = 2,
  kSubsample = 3,
  kGrouping = 4,
  kNoise = 5,
  kAugment = 6,
  kTrial = 7,
};

std::uint64_t mix_key(std::uint64_t a, std::uint64_t b);

// Deterministic generator for one (kind, seed, step, a, b) key.
class Rng {
 public:
  Rng(StreamKind kind, std::uint64_t seed, std::uint64_t step = 0,
      std::uint64_t a = 0, std::uint64_t b = 0);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform();

  // Standard normal via Box-Muller. std::normal_distribution is
  // implementation-defined, so we roll our own for reproducibility.
  double gaussian();

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dpgcl
