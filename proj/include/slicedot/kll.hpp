#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slicedot/one_d.hpp"
#include "slicedot/rng.hpp"

namespace slicedot {

/// KLL streaming quantile sketch. Level h (0-based here) holds items of
/// weight 2^h and has capacity ceil(k (2/3)^(H-1-h)) + 1. A level that
/// reaches capacity is sorted and halved (odd or even positions by one fair
/// coin), survivors moving up one level.
class KllSketch {
 public:
  KllSketch(int k, RngStream rng);

  void insert(double x);
  /// Levelwise concatenation followed by compaction. Consumes both inputs.
  static KllSketch merge(KllSketch a, KllSketch b);

  /// Weighted atoms sum_h sum_{x in C_h} 2^h delta_x, normalized to mass 1.
  Slice to_slice() const;

  int k() const noexcept { return k_; }
  int height() const noexcept { return static_cast<int>(levels_.size()); }
  std::uint64_t items_seen() const noexcept { return items_seen_; }
  std::size_t retained() const noexcept;
  std::size_t capacity(int level) const;
  const std::vector<std::vector<double>>& levels() const noexcept { return levels_; }

  /// Versioned binary layout: "KLL1", u32 k, u32 H, u64 items_seen, then per
  /// level u64 count followed by count f64 items (little-endian).
  std::string serialize() const;
  static KllSketch deserialize(const std::string& bytes, std::size_t* consumed = nullptr);

 private:
  void compress();
  void compact_level(std::size_t h);

  int k_;
  std::vector<std::vector<double>> levels_;
  std::uint64_t items_seen_ = 0;
  RngStream rng_;
};

}  // namespace slicedot
