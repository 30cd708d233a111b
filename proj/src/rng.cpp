#include "paramshap/rng.hpp"

#include "paramshap/errors.hpp"

namespace paramshap {

uint64_t splitmix64_next(uint64_t& x) {
  x += 0x9E3779B97F4A7C15ULL;
  uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

std::mt19937_64 make_engine(uint64_t seed, uint64_t stream) {
  // Hash (seed, stream) into a full-width seed sequence so that nearby
  // streams start from unrelated states.
  uint64_t state = seed;
  uint64_t a = splitmix64_next(state);
  state ^= stream * 0xD1342543DE82EF95ULL + 0x2545F4914F6CDD1DULL;
  uint64_t b = splitmix64_next(state);
  uint64_t c = splitmix64_next(state);
  uint64_t d = splitmix64_next(state);
  std::seed_seq seq{static_cast<uint32_t>(a), static_cast<uint32_t>(a >> 32),
                    static_cast<uint32_t>(b), static_cast<uint32_t>(b >> 32),
                    static_cast<uint32_t>(c), static_cast<uint32_t>(c >> 32),
                    static_cast<uint32_t>(d), static_cast<uint32_t>(d >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(uint64_t seed, uint64_t stream) : engine_(make_engine(seed, stream)) {}

uint64_t Rng::below_u64(uint64_t n) {
  if (n == 0) throw InternalError("Rng::below_u64 called with n = 0");
  if (n == 1) return 0;
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return r % n;
}

BigInt Rng::below(const BigInt& n) {
  if (n <= 0) throw InternalError("Rng::below called with non-positive bound");
  if (n.fits_ulong_p()) return BigInt(below_u64(n.get_ui()));
  const size_t bits = mpz_sizeinbase(n.get_mpz_t(), 2);
  const size_t words = (bits + 63) / 64;
  const unsigned top_bits = static_cast<unsigned>(bits - (words - 1) * 64);
  const uint64_t top_mask = top_bits >= 64 ? UINT64_MAX : ((uint64_t{1} << top_bits) - 1);
  while (true) {
    BigInt r = 0;
    for (size_t w = 0; w < words; ++w) {
      uint64_t word = engine_();
      if (w == 0) word &= top_mask;  // keep the draw within [0, 2^bits)
      r <<= 64;
      BigInt chunk;
      mpz_import(chunk.get_mpz_t(), 1, 1, sizeof(word), 0, 0, &word);
      r |= chunk;
    }
    if (r < n) return r;
  }
}

}  // namespace paramshap
