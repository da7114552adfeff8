#include "proxpg/rng.hpp"

#include <cassert>

namespace proxpg {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(prod >> 32);
  lo = static_cast<std::uint32_t>(prod);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

RandomStream::RandomStream(std::uint64_t key, std::uint64_t index)
    : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
      index_(index) {}

void RandomStream::refill() {
  const Philox4x32::Counter ctr{
      static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
      static_cast<std::uint32_t>(index_), static_cast<std::uint32_t>(index_ >> 32)};
  const auto out = Philox4x32::block(ctr, key_);
  buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  available_ = 2;
  ++block_;
}

RandomStream::result_type RandomStream::operator()() {
  if (available_ == 0) refill();
  return buffer_[2 - available_--];
}

double RandomStream::uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

std::uint64_t RandomStream::below(std::uint64_t n) {
  assert(n > 0);
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = (*this)();
    if (r >= threshold) return r % n;
  }
}

StreamFactory::StreamFactory(std::uint64_t root_seed) : key_(mix64(root_seed)) {}

StreamFactory StreamFactory::child(std::string_view label,
                                   std::uint64_t index) const {
  const std::uint64_t k = mix64(mix64(key_ ^ fnv1a(label)) + index);
  return StreamFactory(FromKey{}, k);
}

}  // namespace proxpg
