#pragma once

// Counter-based random streams (Philox4x32-10, Salmon et al. 2011).
//
// A stream is identified by (key, stream id). The 128-bit Philox counter is
// (block index, stream id), so any stream can be opened directly without
// advancing another one; the Monte-Carlo engine uses one stream per trial.
//
// Normal variates use the Marsaglia polar method on 53-bit uniforms. The whole
// chain is fixed here so that results are bit-reproducible across platforms
// and standard libraries.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include "sicwer/errors.hpp"

namespace sicwer {

using Philox4x32Block = std::array<std::uint32_t, 4>;
using Philox4x32Key = std::array<std::uint32_t, 2>;

/// Ten-round Philox4x32 bijection of `counter` under `key`.
inline Philox4x32Block philox4x32_10(Philox4x32Block counter, Philox4x32Key key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * counter[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * counter[2];
    counter = {static_cast<std::uint32_t>(p1 >> 32) ^ counter[1] ^ key[0], static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ counter[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return counter;
}

/// Satisfies UniformRandomBitGenerator with 64-bit output.
class PhiloxStream {
 public:
  using result_type = std::uint64_t;

  PhiloxStream(std::uint64_t key, std::uint64_t stream_id)
      : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)}, stream_id_(stream_id) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (buffered_ == 0) refill();
    const std::size_t base = 4 - 2 * buffered_;
    --buffered_;
    return static_cast<std::uint64_t>(block_[base]) | (static_cast<std::uint64_t>(block_[base + 1]) << 32);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1p-53; }

  /// Uniform on the closed integer range [lo, hi], by unbiased rejection.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    detail::require<DomainError>(lo <= hi, "PhiloxStream::uniform_int: empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
    if (span == max()) return static_cast<std::int64_t>((*this)());
    const std::uint64_t range = span + 1;
    const std::uint64_t limit = max() - max() % range;
    std::uint64_t draw = (*this)();
    while (draw >= limit) draw = (*this)();
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + draw % range);
  }

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
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

  [[nodiscard]] std::uint64_t stream_id() const { return stream_id_; }

 private:
  void refill() {
    block_ = philox4x32_10({static_cast<std::uint32_t>(block_index_), static_cast<std::uint32_t>(block_index_ >> 32),
                            static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)},
                           key_);
    ++block_index_;
    buffered_ = 2;
  }

  Philox4x32Key key_;
  std::uint64_t stream_id_;
  std::uint64_t block_index_ = 0;
  Philox4x32Block block_{};
  std::size_t buffered_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Stream ids at the top of the 64-bit range are reserved for per-experiment
// draws; trial t uses stream id t.
inline constexpr std::uint64_t kFixedTruthStream = ~std::uint64_t{0};
inline constexpr std::uint64_t kAmortizedMatrixStream = ~std::uint64_t{0} - 1;

}  // namespace sicwer
