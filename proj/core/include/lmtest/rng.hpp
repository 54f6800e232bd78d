#pragma once

#include <array>
#include <cstdint>

namespace lmtest {

/// Philox4x32-10 counter-based bijection, as in Random123.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter apply(Counter ctr, Key key) noexcept;
};

/// Tags separating independent uses of one master seed.
enum class StreamPurpose : std::uint32_t {
  Observation = 1,
  NullObservation = 2,
  AlternativeObservation = 3,
  Multistart = 4,
  PriorPairs = 5,
  Instances = 6,
};

/// A random-access stream of uniforms and standard normals keyed by
/// (master seed, stream index, purpose). Value #i depends only on the key and
/// i, so any subset of a stream can be regenerated bit-identically and
/// distinct streams can be consumed from different threads.
class Substream {
 public:
  Substream(std::uint64_t seed, std::uint64_t stream, StreamPurpose purpose) noexcept;

  /// Uniform on (0, 1) with 53 random bits.
  double uniform(std::uint64_t index) const noexcept;
  /// Standard normal (Box-Muller over one Philox block per pair of indices).
  double gaussian(std::uint64_t index) const noexcept;
  std::uint64_t bits(std::uint64_t index) const noexcept;

 private:
  Philox4x32::Counter block(std::uint64_t block_index) const noexcept;

  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint32_t purpose_;
};

/// Sequential cursor over a Substream, for code that just wants "the next" draw.
class StreamCursor {
 public:
  explicit StreamCursor(Substream stream) noexcept : stream_(stream) {}
  double uniform() noexcept { return stream_.uniform(next_u_++); }
  double gaussian() noexcept { return stream_.gaussian(next_g_++); }
  std::uint64_t bits() noexcept { return stream_.bits(next_u_++); }

 private:
  Substream stream_;
  std::uint64_t next_u_ = 0;
  std::uint64_t next_g_ = 0;
};

}  // namespace lmtest
