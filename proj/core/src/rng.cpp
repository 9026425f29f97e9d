#include "eqmest/rng.hpp"

#include <cmath>
#include <numbers>

namespace eqmest {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t Rng::next_u64() { return splitmix64(state_); }

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform_in(double lo, double hi) {
  double u;
  do {
    u = uniform();
  } while (u == 0.0);
  return lo + u * (hi - lo);
}

double Rng::gaussian() {
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::bounded(std::uint64_t n) {
  if (n <= 1) return 0;
  // reject the tail so every residue class is equally likely
  const std::uint64_t rem = ~std::uint64_t{0} % n;
  const std::uint64_t limit = ~std::uint64_t{0} - rem;
  std::uint64_t r;
  do {
    r = next_u64();
  } while (r >= limit);
  return r % n;
}

int Rng::uniform_int(int lo, int hi) {
  return lo + static_cast<int>(bounded(static_cast<std::uint64_t>(hi - lo) + 1));
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b, std::uint64_t c) {
  std::uint64_t s = master;
  (void)splitmix64(s);
  s ^= 0x243F6A8885A308D3ULL + a;
  (void)splitmix64(s);
  s ^= 0x13198A2E03707344ULL + b;
  (void)splitmix64(s);
  s ^= 0xA4093822299F31D0ULL + c;
  return splitmix64(s);
}

}  // namespace eqmest
