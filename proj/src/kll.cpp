#include "slicedot/kll.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

namespace slicedot {

KllSketch::KllSketch(int k, RngStream rng) : k_(k), levels_(1), rng_(rng) {
  if (k < 2) fail(ErrorCode::InvalidArgument, "KLL base capacity k must be >= 2");
}

std::size_t KllSketch::capacity(int level) const {
  const int depth = height() - 1 - level;
  return static_cast<std::size_t>(std::ceil(k_ * std::pow(2.0 / 3.0, depth))) + 1;
}

std::size_t KllSketch::retained() const noexcept {
  std::size_t r = 0;
  for (const auto& l : levels_) r += l.size();
  return r;
}

void KllSketch::insert(double x) {
  if (std::isnan(x)) fail(ErrorCode::NonFinite, "cannot insert NaN into a sketch");
  levels_[0].push_back(x);
  ++items_seen_;
  compress();
}

void KllSketch::compact_level(std::size_t h) {
  if (h + 1 == levels_.size()) levels_.emplace_back();
  auto& level = levels_[h];
  std::sort(level.begin(), level.end());
  const std::size_t pairs = level.size() / 2;
  // With an odd count the smallest item stays behind so total weight is kept.
  const std::size_t start = level.size() - 2 * pairs;
  const std::size_t offset = rng_.coin() ? 1 : 0;
  auto& up = levels_[h + 1];
  for (std::size_t p = 0; p < pairs; ++p) up.push_back(level[start + 2 * p + offset]);
  level.resize(start);
}

void KllSketch::compress() {
  for (std::size_t h = 0; h < levels_.size(); ++h)
    if (levels_[h].size() >= capacity(static_cast<int>(h))) compact_level(h);
}

KllSketch KllSketch::merge(KllSketch a, KllSketch b) {
  if (a.k_ != b.k_) fail(ErrorCode::InvalidArgument, "KLL merge needs equal base capacity k");
  if (b.levels_.size() > a.levels_.size()) a.levels_.resize(b.levels_.size());
  for (std::size_t h = 0; h < b.levels_.size(); ++h)
    a.levels_[h].insert(a.levels_[h].end(), b.levels_[h].begin(), b.levels_[h].end());
  a.items_seen_ += b.items_seen_;
  // Capacities grow with height, so repeat until every level fits.
  bool again = true;
  while (again) {
    again = false;
    for (std::size_t h = 0; h < a.levels_.size(); ++h)
      if (a.levels_[h].size() >= a.capacity(static_cast<int>(h))) {
        a.compact_level(h);
        again = true;
      }
  }
  return a;
}

Slice KllSketch::to_slice() const {
  std::vector<double> values, weights;
  values.reserve(retained());
  weights.reserve(retained());
  double total = 0;
  for (std::size_t h = 0; h < levels_.size(); ++h) {
    const double w = std::ldexp(1.0, static_cast<int>(h));
    for (double x : levels_[h]) {
      values.push_back(x);
      weights.push_back(w);
      total += w;
    }
  }
  if (values.empty()) fail(ErrorCode::EmptyInput, "sketch is empty");
  for (double& w : weights) w /= total;
  return Slice::from_values(values, weights);
}

namespace {

template <typename T>
void put(std::string& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) fail(ErrorCode::Parse, "truncated sketch data");
  char buf[sizeof(T)];
  std::memcpy(buf, in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  pos += sizeof(T);
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

std::string KllSketch::serialize() const {
  std::string out = "KLL1";
  put<std::uint32_t>(out, static_cast<std::uint32_t>(k_));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(levels_.size()));
  put<std::uint64_t>(out, items_seen_);
  for (const auto& level : levels_) {
    put<std::uint64_t>(out, level.size());
    for (double x : level) put<double>(out, x);
  }
  return out;
}

KllSketch KllSketch::deserialize(const std::string& bytes, std::size_t* consumed) {
  std::size_t pos = consumed ? *consumed : 0;
  if (bytes.compare(pos, 4, "KLL1") != 0) fail(ErrorCode::Parse, "bad sketch magic");
  pos += 4;
  const auto k = get<std::uint32_t>(bytes, pos);
  const auto height = get<std::uint32_t>(bytes, pos);
  const auto seen = get<std::uint64_t>(bytes, pos);
  if (height == 0) fail(ErrorCode::Parse, "sketch with zero levels");
  KllSketch s(static_cast<int>(k), RngStream(seen, height));
  s.levels_.assign(height, {});
  s.items_seen_ = seen;
  for (auto& level : s.levels_) {
    const auto count = get<std::uint64_t>(bytes, pos);
    if (count > (bytes.size() - pos) / sizeof(double)) fail(ErrorCode::Parse, "truncated sketch level");
    level.resize(count);
    for (auto& x : level) x = get<double>(bytes, pos);
  }
  if (consumed) *consumed = pos;
  return s;
}

}  // namespace slicedot
