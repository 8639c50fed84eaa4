#pragma once

#include <cstdint>

#include "cct/special_functions.hpp"

// Counter-based deterministic RNG. Every stream is a pure function of
// (seed, stream id, draw index), so Monte Carlo pipelines can hand one
// substream to each replicate and produce bit-identical results for any
// worker count or scheduling order.

namespace cct {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// splitmix64 output function (Steele, Lea, Flood 2014)
inline std::uint64_t splitmix_finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derive an avalanche-mixed stream key from a seed and a stream id. Two
// rounds of the splitmix finalizer keep distinct (seed, id) pairs apart.
inline std::uint64_t substream_key(std::uint64_t seed, std::uint64_t id) {
  std::uint64_t a = splitmix_finalize(seed + kGolden);
  return splitmix_finalize(a ^ (id + kGolden));
}

class RngStream {
 public:
  RngStream() : key_(substream_key(0, 0)), ctr_(0) {}
  explicit RngStream(std::uint64_t seed) : key_(substream_key(seed, 0)), ctr_(0) {}
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : key_(substream_key(seed, stream_id)), ctr_(0) {}

  static RngStream from_key(std::uint64_t key) {
    RngStream s;
    s.key_ = key;
    s.ctr_ = 0;
    return s;
  }

  // Independent child stream; forking does not disturb this stream's state.
  RngStream fork(std::uint64_t id) const {
    return from_key(substream_key(key_, id));
  }

  std::uint64_t next_u64() {
    ctr_ += kGolden;
    return splitmix_finalize(key_ ^ ctr_);
  }

  // Uniform on the open interval (0,1): 53-bit mantissa, offset half a step
  // so 0 and 1 are unreachable.
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal by inverse CDF, so draws are a monotone function of the
  // underlying uniforms (handy for coupling across methods).
  double next_normal() { return norm_quantile(next_uniform()); }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_;
};

inline RngStream substream(std::uint64_t seed, std::uint64_t id) {
  return RngStream(seed, id);
}

// Stream id layout: high 16 bits tag the purpose, low 48 bits index the
// replicate or row. Keeps id spaces of different pipeline stages disjoint.
namespace stream_purpose {
inline constexpr std::uint64_t kTail = 1;
inline constexpr std::uint64_t kSize = 2;
inline constexpr std::uint64_t kPower = 3;
inline constexpr std::uint64_t kPowerTune = 4;
inline constexpr std::uint64_t kMinp = 5;
inline constexpr std::uint64_t kMvnRow = 6;
inline constexpr std::uint64_t kBasis = 7;
inline constexpr std::uint64_t kPlacement = 8;
inline constexpr std::uint64_t kFixture = 9;
inline constexpr std::uint64_t kGof = 10;
}  // namespace stream_purpose

inline constexpr std::uint64_t stream_id(std::uint64_t purpose, std::uint64_t index) {
  return (purpose << 48) | (index & 0xffffffffffffULL);
}

}  // namespace cct
