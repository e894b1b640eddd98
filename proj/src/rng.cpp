#include "relstock/rng.hpp"

#include <cmath>
#include <numbers>

namespace relstock {

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return x % n;
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream, std::uint64_t index) {
  Rng mix(root ^ (stream * 0xD1B54A32D192ED03ULL));
  std::uint64_t s = mix.next_u64();
  Rng second(s ^ (index * 0x8CB92BA72F3D8DD7ULL + 0x632BE59BD9B4E019ULL));
  return second.next_u64();
}

}  // namespace relstock
