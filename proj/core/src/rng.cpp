#include "lmtest/rng.hpp"

#include <cmath>
#include <numbers>

namespace lmtest {

namespace {
constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) noexcept {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline Philox4x32::Counter round(const Philox4x32::Counter& c,
                                 const Philox4x32::Key& k) noexcept {
  std::uint32_t hi0, lo0, hi1, lo1;
  mulhilo(kM0, c[0], hi0, lo0);
  mulhilo(kM1, c[2], hi1, lo1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

inline double to_unit53(std::uint32_t a, std::uint32_t b) noexcept {
  const std::uint64_t x = (static_cast<std::uint64_t>(a) << 32) | b;
  // (x >> 11) + 0.5 keeps the result strictly inside (0, 1).
  return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}
}  // namespace

Philox4x32::Counter Philox4x32::apply(Counter ctr, Key key) noexcept {
  ctr = round(ctr, key);
  for (int r = 1; r < 10; ++r) {
    key[0] += kW0;
    key[1] += kW1;
    ctr = round(ctr, key);
  }
  return ctr;
}

Substream::Substream(std::uint64_t seed, std::uint64_t stream,
                     StreamPurpose purpose) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      stream_(stream),
      purpose_(static_cast<std::uint32_t>(purpose)) {}

Philox4x32::Counter Substream::block(std::uint64_t block_index) const noexcept {
  // 32 bits of block index: 2^33 normals per stream.
  return Philox4x32::apply({static_cast<std::uint32_t>(block_index), purpose_,
                            static_cast<std::uint32_t>(stream_),
                            static_cast<std::uint32_t>(stream_ >> 32)},
                           key_);
}

std::uint64_t Substream::bits(std::uint64_t index) const noexcept {
  const auto b = block(index >> 1);
  const std::size_t off = (index & 1u) * 2;
  return (static_cast<std::uint64_t>(b[off]) << 32) | b[off + 1];
}

double Substream::uniform(std::uint64_t index) const noexcept {
  const auto b = block(index >> 1);
  const std::size_t off = (index & 1u) * 2;
  return to_unit53(b[off], b[off + 1]);
}

double Substream::gaussian(std::uint64_t index) const noexcept {
  const auto b = block(index >> 1);
  const double u1 = to_unit53(b[0], b[1]);
  const double u2 = to_unit53(b[2], b[3]);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return (index & 1u) == 0 ? r * std::cos(angle) : r * std::sin(angle);
}

}  // namespace lmtest
