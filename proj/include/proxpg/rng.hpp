#ifndef PROXPG_RNG_HPP_
#define PROXPG_RNG_HPP_

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

namespace proxpg {

/// Philox4x32-10 block function (Salmon et al., SC'11). Stateless: maps a
/// 128-bit counter and a 64-bit key to 128 random bits.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key);
};

/// A sequential view of one Philox substream. The 64-bit stream index fills
/// the high half of the counter, the block index the low half, so distinct
/// (key, index) pairs never overlap.
///
/// Satisfies UniformRandomBitGenerator.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t key, std::uint64_t index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Unbiased integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

 private:
  void refill();

  Philox4x32::Key key_;
  std::uint64_t index_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int available_ = 0;
};

/// Labeled substream derivation from a 64-bit root seed. Children are keyed
/// by (label, index); each node hands out independent RandomStreams.
class StreamFactory {
 public:
  explicit StreamFactory(std::uint64_t root_seed);

  StreamFactory child(std::string_view label, std::uint64_t index = 0) const;
  RandomStream stream(std::uint64_t index = 0) const {
    return RandomStream(key_, index);
  }
  std::uint64_t key() const { return key_; }

 private:
  struct FromKey {};
  StreamFactory(FromKey, std::uint64_t key) : key_(key) {}

  std::uint64_t key_;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace proxpg

#endif  // PROXPG_RNG_HPP_
