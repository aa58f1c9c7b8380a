#pragma once

// Counter-based random numbers. Every draw in the library is a pure function
// of (seed, replica, stream, address), so any subtree, cell or replica can be
// regenerated in isolation and in any order.

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>

namespace cascadelab {

/// Disjoint counter domains. A value here is never reused for two purposes.
enum class Stream : std::uint32_t {
  cascade = 0,       // branching increments, addressed by parent heap index
  subordinator = 1,  // stable increments, addressed by cell heap index
  resample = 2,      // total-mass bank indices, addressed by cell heap index
  composition = 3,   // one-step smoothing-recursion weights
  sequential = 4,    // PhiloxEngine default
  synthetic = 5,     // planted test distributions
};

namespace philox {

inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

/// Philox4x32 with 10 rounds. Written on scalars so that it vectorizes when
/// inlined into a simd loop.
constexpr void rounds10(std::uint32_t& c0, std::uint32_t& c1, std::uint32_t& c2,
                     std::uint32_t& c3, std::uint32_t k0, std::uint32_t k1) noexcept {
#pragma GCC unroll 10
  for (int r = 0; r < 10; ++r) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c0;
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c2;
    const std::uint32_t n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1 ^ k0;
    const std::uint32_t n1 = static_cast<std::uint32_t>(p1);
    const std::uint32_t n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3 ^ k1;
    const std::uint32_t n3 = static_cast<std::uint32_t>(p0);
    c0 = n0;
    c1 = n1;
    c2 = n2;
    c3 = n3;
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
}

using Block = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

constexpr Block apply(Block ctr, Key key) noexcept {
  rounds10(ctr[0], ctr[1], ctr[2], ctr[3], key[0], key[1]);
  return ctr;
}

/// Output words of `count` consecutive counters (address, replica, stream)
/// starting at first_address: w0 = out[1]:out[0], w1 = out[3]:out[2].
void batch_words(std::uint32_t k0, std::uint32_t k1, std::uint32_t replica, std::uint32_t stream,
                 std::uint64_t first_address, std::size_t count, std::uint64_t* w0,
                 std::uint64_t* w1);

}  // namespace philox

/// Identifies one family of draws: the key is the seed, the counter carries
/// (address, replica, stream).
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint32_t replica = 0;
  Stream stream = Stream::sequential;

  philox::Block block(std::uint64_t address) const noexcept {
    philox::Block ctr{static_cast<std::uint32_t>(address),
                      static_cast<std::uint32_t>(address >> 32), replica,
                      static_cast<std::uint32_t>(stream)};
    return philox::apply(ctr, {static_cast<std::uint32_t>(seed),
                               static_cast<std::uint32_t>(seed >> 32)});
  }

  /// Two 64-bit words for one address.
  std::array<std::uint64_t, 2> words(std::uint64_t address) const noexcept {
    const auto b = block(address);
    return {(static_cast<std::uint64_t>(b[1]) << 32) | b[0],
            (static_cast<std::uint64_t>(b[3]) << 32) | b[2]};
  }
};

/// Uniform in (0, 1], never zero (safe for log).
inline double unit_open_left(std::uint64_t bits) noexcept {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

/// Uniform in [0, 1).
inline double unit_closed_left(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Sequential UniformRandomBitGenerator over one stream: the i-th call
/// returns word (i mod 2) of block (i / 2).
class PhiloxEngine {
 public:
  using result_type = std::uint64_t;

  explicit PhiloxEngine(StreamKey key, std::uint64_t first_address = 0)
      : key_(key), next_address_(first_address) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (have_ == 0) {
      buffer_ = key_.words(next_address_++);
      have_ = 2;
    }
    return buffer_[2 - have_--];
  }

  double uniform() noexcept { return unit_closed_left((*this)()); }
  double uniform_positive() noexcept { return unit_open_left((*this)()); }
  double exponential() noexcept;
  double normal() noexcept;

  const StreamKey& key() const noexcept { return key_; }

 private:
  StreamKey key_;
  std::uint64_t next_address_;
  std::array<std::uint64_t, 2> buffer_{};
  int have_ = 0;
};

}  // namespace cascadelab
