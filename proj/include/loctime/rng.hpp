#pragma once

#include <cstdint>

namespace loctime {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based stream: the k-th draw is a pure function of (key, k), and the
// key is a pure function of (master seed, stream index). Streams for distinct
// trajectories can therefore be produced in any order on any thread.
class CounterStream {
 public:
  CounterStream(std::uint64_t master_seed, std::uint64_t stream_index) noexcept
      : key_(splitmix64(master_seed ^ splitmix64(stream_index + 0x632be59bd9b4e019ULL))) {}

  std::uint64_t next_u64() noexcept {
    return splitmix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_);
  }

  // Uniform on [0, 1) with 53 random bits.
  double next_unit() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace loctime
