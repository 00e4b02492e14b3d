#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mattefuse {

// Deterministic generator keyed by a root seed plus a list of integer keys
// (e.g. {fg_index, pair_index, stream}). Two generators built from the same
// key sequence produce the same stream on every platform: both the engine
// and std::seed_seq are fully specified by the standard, and the
// floating-point conversions below avoid the implementation-defined
// <random> distributions.
class KeyedRng {
 public:
  KeyedRng(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, bound), bound > 0, without modulo bias.
  std::uint64_t below(std::uint64_t bound);

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mattefuse
