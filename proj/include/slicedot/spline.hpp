#pragma once

#include <algorithm>
#include <cmath>
#include <variant>
#include <vector>

#include "slicedot/one_d.hpp"

namespace slicedot {

/// Monotone rational-quadratic spline through knots (t_i, x_i) with knot
/// derivatives d_i > 0. C^1, strictly increasing, invertible on [x_0, x_last].
template <typename Scalar>
class RationalQuadraticSpline {
 public:
  RationalQuadraticSpline(std::vector<Scalar> t, std::vector<Scalar> x, std::vector<Scalar> d)
      : t_(std::move(t)), x_(std::move(x)), d_(std::move(d)) {
    if (t_.size() < 2 || t_.size() != x_.size() || t_.size() != d_.size())
      fail(ErrorCode::InvalidArgument, "spline needs >= 2 knots with matching sizes");
    for (std::size_t i = 0; i + 1 < t_.size(); ++i) {
      if (!(t_[i + 1] > t_[i])) fail(ErrorCode::InvalidArgument, "spline knot t-values must increase");
      if (!(x_[i + 1] > x_[i])) fail(ErrorCode::InvalidArgument, "spline knot x-values must increase");
    }
    for (Scalar v : d_)
      if (!(v > 0)) fail(ErrorCode::InvalidArgument, "spline knot derivatives must be positive");
  }

  Scalar operator()(Scalar t) const {
    if (t <= t_.front()) return x_.front();
    if (t >= t_.back()) return x_.back();
    const std::size_t i = bin_of(t_, t);
    const Scalar s = slope(i), xi = xi_of(i, t), w = xi * (1 - xi);
    return x_[i] + (x_[i + 1] - x_[i]) * (s * xi * xi + d_[i] * w) / (s + sigma(i) * w);
  }

  Scalar derivative(Scalar t) const {
    const std::size_t i = bin_of(t_, std::clamp(t, t_.front(), t_.back()));
    const Scalar s = slope(i), xi = xi_of(i, std::clamp(t, t_.front(), t_.back())), w = xi * (1 - xi);
    const Scalar den = s + sigma(i) * w;
    return s * s * (d_[i + 1] * xi * xi + 2 * s * w + d_[i] * (1 - xi) * (1 - xi)) / (den * den);
  }

  Scalar inverse(Scalar x) const {
    if (x <= x_.front()) return t_.front();
    if (x >= x_.back()) return t_.back();
    const std::size_t i = bin_of(x_, x);
    const Scalar s = slope(i), sg = sigma(i);
    const Scalar zeta = (x - x_[i]) / (x_[i + 1] - x_[i]);
    const Scalar qa = (s - d_[i]) + zeta * sg;
    const Scalar qb = d_[i] - zeta * sg;
    const Scalar qc = -s * zeta;
    const Scalar disc = std::max(Scalar(0), qb * qb - 4 * qa * qc);
    const Scalar xi = 2 * qc / (-qb - std::sqrt(disc));
    return t_[i] + (t_[i + 1] - t_[i]) * xi;
  }

  const std::vector<Scalar>& knots_t() const noexcept { return t_; }
  const std::vector<Scalar>& knots_x() const noexcept { return x_; }
  const std::vector<Scalar>& knot_derivatives() const noexcept { return d_; }

 private:
  static std::size_t bin_of(const std::vector<Scalar>& grid, Scalar v) {
    auto it = std::upper_bound(grid.begin(), grid.end(), v);
    std::size_t i = static_cast<std::size_t>(it - grid.begin());
    i = i == 0 ? 0 : i - 1;
    return std::min(i, grid.size() - 2);
  }
  Scalar slope(std::size_t i) const { return (x_[i + 1] - x_[i]) / (t_[i + 1] - t_[i]); }
  Scalar sigma(std::size_t i) const { return d_[i + 1] + d_[i] - 2 * slope(i); }
  Scalar xi_of(std::size_t i, Scalar t) const { return (t - t_[i]) / (t_[i + 1] - t_[i]); }

  std::vector<Scalar> t_, x_, d_;
};

/// Quantile function: the empirical step function or a smooth spline fit.
template <typename Scalar>
using QuantileFn = std::variant<SortedSlice<Scalar>, RationalQuadraticSpline<Scalar>>;

template <typename Scalar>
Scalar quantile(const QuantileFn<Scalar>& q, Scalar t) {
  if (!(t >= 0 && t <= 1)) fail(ErrorCode::InvalidArgument, "quantile level outside [0, 1]");
  return std::visit([&](const auto& f) -> Scalar {
    if constexpr (std::is_same_v<std::decay_t<decltype(f)>, SortedSlice<Scalar>>)
      return quantile(f, t);
    else
      return f(t);
  }, q);
}

/// Fits a spline quantile function to a slice: knot i sits at the mass strictly
/// below atom i (normalized), interior derivatives come from the local quadratic
/// through the neighbouring knots, and the end derivatives copy the adjacent
/// bin slope.
template <typename Scalar>
RationalQuadraticSpline<Scalar> spline_fit(const SortedSlice<Scalar>& s) {
  const std::size_t n = s.values.size();
  std::size_t distinct = n == 0 ? 0 : 1;
  for (std::size_t i = 1; i < n; ++i)
    if (s.values[i] != s.values[i - 1]) ++distinct;
  if (distinct < 2) fail(ErrorCode::InvalidArgument, "spline fit needs at least two distinct atoms");
  for (std::size_t i = 1; i < n; ++i)
    if (!(s.values[i] > s.values[i - 1])) fail(ErrorCode::InvalidArgument, "spline knots need strictly increasing atoms");

  std::vector<Scalar> t(n), x(s.values), d(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = (i == 0 ? Scalar(0) : s.cum_weights[i - 1]) / s.mass();
  std::vector<Scalar> slopes(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) slopes[i] = (x[i + 1] - x[i]) / (t[i + 1] - t[i]);
  d[0] = slopes.front();
  d[n - 1] = slopes.back();
  for (std::size_t i = 1; i + 1 < n; ++i)
    d[i] = (slopes[i - 1] * (t[i + 1] - t[i]) + slopes[i] * (t[i] - t[i - 1])) / (t[i + 1] - t[i - 1]);
  return RationalQuadraticSpline<Scalar>(std::move(t), std::move(x), std::move(d));
}

}  // namespace slicedot
