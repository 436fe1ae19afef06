#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include "dmclab/error.hpp"

namespace dmclab {

/// Philox4x32-10 block function (Salmon et al., SC'11).
inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                 std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

/// What a stream is used for; part of the stream identity.
enum class Purpose : std::uint8_t {
  Init = 1,
  Mutation = 2,
  Selection = 3,
  FinalSelection = 4,
  Repetition = 5,
  Test = 6,
};

struct StreamId {
  std::uint64_t block = 0;   // < 2^24
  std::uint64_t walker = 0;  // < 2^32
  Purpose purpose = Purpose::Test;
};

/// Counter-based random stream.
///
/// The root seed is the Philox key; the stream id occupies the upper half of
/// the 128-bit counter and the draw index the lower half, so distinct ids
/// never share a counter value and the output of a stream depends only on
/// (root_seed, id), not on which thread consumes it or when.
///
/// Satisfies UniformRandomBitGenerator.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t root_seed, StreamId id)
      : key_{static_cast<std::uint32_t>(root_seed), static_cast<std::uint32_t>(root_seed >> 32)} {
    if (id.block >= (1ull << 24)) throw InvalidArgument("RngStream: block index >= 2^24");
    if (id.walker >= (1ull << 32)) throw InvalidArgument("RngStream: walker index >= 2^32");
    stream_hi_ = static_cast<std::uint32_t>(id.walker);
    stream_top_ = static_cast<std::uint32_t>(id.block) |
                  (static_cast<std::uint32_t>(id.purpose) << 24);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (buffered_ == 0) refill();
    return buffer_[--buffered_];
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; log of it is always finite.
  double uniform_pos() { return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53; }

  /// Standard normal (Marsaglia polar method).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  /// Number of Philox blocks consumed so far.
  [[nodiscard]] std::uint64_t blocks_used() const { return counter_; }

 private:
  void refill() {
    const std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(counter_),
                                           static_cast<std::uint32_t>(counter_ >> 32), stream_hi_,
                                           stream_top_};
    const auto out = philox4x32_10(ctr, key_);
    ++counter_;
    buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    buffered_ = 2;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_hi_ = 0;
  std::uint32_t stream_top_ = 0;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Seed of an independent sub-experiment, derived through its own stream.
inline std::uint64_t derive_seed(std::uint64_t root_seed, std::uint64_t group,
                                 std::uint64_t index) {
  RngStream s(root_seed, StreamId{group, index, Purpose::Repetition});
  return s();
}

}  // namespace dmclab
