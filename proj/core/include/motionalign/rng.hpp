#pragma once

#include <cstdint>
#include <initializer_list>

namespace motionalign {

/// Counter-based generator: the n-th draw of a stream is a pure function of
/// (seed, stream, n), so per-group or per-round streams can be derived
/// independently of scheduling.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) : key_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ull))) {}

  // A child stream keyed by a path of integers, e.g. {round, group}.
  CounterRng derive(std::initializer_list<std::uint64_t> path) const;

  std::uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ull * ++counter_); }
  double uniform();  // [0, 1)
  double normal();   // standard normal via Box-Muller
  std::uint64_t below(std::uint64_t bound);

  std::uint64_t counter() const { return counter_; }

  static std::uint64_t mix(std::uint64_t z);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace motionalign
