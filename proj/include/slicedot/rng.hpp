#pragma once

#include <cstdint>

namespace slicedot {

/// Counter-based random stream. Draw k of stream (seed, id) is a pure hash of
/// (seed, id, k), so every platform replays the same sequence and substreams
/// never overlap.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Standard normal (Box-Muller, second variate cached).
  double normal();
  /// One fair coin.
  bool coin();

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace slicedot
