#pragma once

#include <cstdint>

namespace eqmest {

// Deterministic 64-bit generator (splitmix64 core). Every randomised
// routine in the library draws through this class, so a given seed yields
// the same stream on any platform and compiler.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();

  // Uniform on (lo, hi).
  double uniform_in(double lo, double hi);

  // Standard normal via Box-Muller (cache-free, two uniforms per draw).
  double gaussian();

  // Unbiased uniform draw on {0, ..., n-1}, n >= 1.
  std::uint64_t bounded(std::uint64_t n);

  // Inclusive integer range.
  int uniform_int(int lo, int hi);

 private:
  std::uint64_t state_;
};

// Stream-splitting hash: mixes a master seed with up to three coordinates
// (e.g. process id, fraction index, algorithm id) into an independent
// per-run seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b = 0, std::uint64_t c = 0);

}  // namespace eqmest
