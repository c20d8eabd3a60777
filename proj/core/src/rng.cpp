#include "motionalign/rng.hpp"

#include <cmath>
#include <numbers>

namespace motionalign {

std::uint64_t CounterRng::mix(std::uint64_t z) {
  // splitmix64 finalizer
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

CounterRng CounterRng::derive(std::initializer_list<std::uint64_t> path) const {
  std::uint64_t key = key_;
  for (std::uint64_t p : path) key = mix(key ^ mix(p + 0xd1b54a32d192ed03ull));
  CounterRng child(0);
  child.key_ = key;
  return child;
}

double CounterRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double CounterRng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t CounterRng::below(std::uint64_t bound) {
  if (bound == 0) return 0;
  return static_cast<std::uint64_t>(uniform() * static_cast<double>(bound)) % bound;
}

}  // namespace motionalign
