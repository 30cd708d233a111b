#pragma once

#include <cstdint>
#include <random>

#include "paramshap/rational.hpp"

namespace paramshap {

/// One step of the splitmix64 sequence; x is the state before the step.
uint64_t splitmix64_next(uint64_t& x);

/// Deterministic stream-splittable generator. Equal (seed, stream) pairs
/// produce identical draw sequences on every platform, so work can be sliced
/// into chunks with one stream each and rejoined in any order.
class Rng {
 public:
  explicit Rng(uint64_t seed, uint64_t stream = 0);

  uint64_t next_u64() { return engine_(); }

  /// Uniform draw from {0, ..., n-1}; n must be positive. Rejection-based,
  /// exactly uniform.
  uint64_t below_u64(uint64_t n);

  /// Uniform draw from {0, ..., n-1} for arbitrary-size n > 0.
  BigInt below(const BigInt& n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace paramshap
