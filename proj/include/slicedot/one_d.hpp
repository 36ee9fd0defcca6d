#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "slicedot/measures.hpp"
#include "slicedot/rng.hpp"

namespace slicedot {

/// A one-dimensional measure with atoms sorted ascending.
/// `perm[k]` is the original index of the k-th smallest atom; ties keep
/// ascending original index.
template <typename Scalar>
struct SortedSlice {
  std::vector<Scalar> values;
  std::vector<Scalar> weights;
  std::vector<Scalar> cum_weights;
  std::vector<Index> perm;

  Index size() const noexcept { return static_cast<Index>(values.size()); }
  Scalar mass() const noexcept { return cum_weights.empty() ? Scalar(0) : cum_weights.back(); }

  static SortedSlice from_unsorted(const VectorX<Scalar>& raw, const VectorX<Scalar>& w) {
    if (raw.size() == 0) fail(ErrorCode::EmptyInput, "slice needs at least one atom");
    if (raw.size() != w.size()) fail(ErrorCode::DimensionMismatch, "slice values/weights size mismatch");
    const Index n = raw.size();
    SortedSlice s;
    s.perm.resize(static_cast<std::size_t>(n));
    std::iota(s.perm.begin(), s.perm.end(), Index(0));
    std::stable_sort(s.perm.begin(), s.perm.end(), [&](Index a, Index b) { return raw(a) < raw(b); });
    s.values.resize(s.perm.size());
    s.weights.resize(s.perm.size());
    s.cum_weights.resize(s.perm.size());
    Scalar acc = 0;
    for (std::size_t k = 0; k < s.perm.size(); ++k) {
      s.values[k] = raw(s.perm[k]);
      s.weights[k] = w(s.perm[k]);
      acc += s.weights[k];
      s.cum_weights[k] = acc;
    }
    return s;
  }

  static SortedSlice from_values(const std::vector<Scalar>& raw, const std::vector<Scalar>& w) {
    return from_unsorted(Eigen::Map<const VectorX<Scalar>>(raw.data(), static_cast<Index>(raw.size())),
                         Eigen::Map<const VectorX<Scalar>>(w.data(), static_cast<Index>(w.size())));
  }

  static SortedSlice uniform(const std::vector<Scalar>& raw) {
    const Scalar w = Scalar(1) / Scalar(raw.size());
    return from_values(raw, std::vector<Scalar>(raw.size(), w));
  }
};

using Slice = SortedSlice<double>;

template <typename Scalar>
struct PlanEntry {
  Index i;
  Index j;
  Scalar mass;
};

/// Sparse monotone plan in sorted-index space.
template <typename Scalar>
struct Plan1D {
  std::vector<PlanEntry<Scalar>> entries;
  Index n = 0;
  Index m = 0;
};

template <typename Scalar>
struct DualPotentials {
  std::vector<Scalar> f;
  std::vector<Scalar> g;
};

/// c(x, y) = |x - y|^p with exact fast paths for p = 1 and p = 2.
template <typename Scalar>
struct PowerCost {
  Scalar p = 2;

  Scalar operator()(Scalar x, Scalar y) const { return of_gap(x - y); }
  Scalar of_gap(Scalar diff) const {
    const Scalar a = std::abs(diff);
    if (p == Scalar(2)) return a * a;
    if (p == Scalar(1)) return a;
    return std::pow(a, p);
  }
};

namespace detail {
template <typename Scalar>
void require_p(Scalar p) {
  if (!(p >= Scalar(1)) || !std::isfinite(static_cast<double>(p)))
    fail(ErrorCode::InvalidArgument, "order p must be a finite real >= 1");
}
}  // namespace detail

/// North-west corner rule on sorted slices.
template <typename Scalar>
Plan1D<Scalar> northwest_corner(const SortedSlice<Scalar>& a, const SortedSlice<Scalar>& b) {
  require_equal_mass(a.mass(), b.mass());
  Plan1D<Scalar> plan;
  plan.n = a.size();
  plan.m = b.size();
  plan.entries.reserve(static_cast<std::size_t>(plan.n + plan.m));
  Index i = 0, j = 0;
  Scalar ra = a.weights[0], rb = b.weights[0];
  while (i < plan.n && j < plan.m) {
    const Scalar t = std::min(ra, rb);
    if (t > 0) plan.entries.push_back({i, j, t});
    ra -= t;
    rb -= t;
    if (ra == 0) {
      ++i;
      if (i < plan.n) ra = a.weights[static_cast<std::size_t>(i)];
    }
    if (rb == 0) {
      ++j;
      if (j < plan.m) rb = b.weights[static_cast<std::size_t>(j)];
    }
  }
  return plan;
}

template <typename Scalar>
struct PlanWithPotentials {
  Plan1D<Scalar> plan;
  DualPotentials<Scalar> potentials;
};

/// Which index moves when a row and a column run out together. The plan is the
/// same either way; the potentials are the two extreme dual solutions.
enum class NwTie { AdvanceRow, AdvanceColumn };

/// North-west corner that also propagates Kantorovich potentials along the
/// staircase: f_0 = 0, g_0 = c(x_0, y_0), and every new row/column potential is
/// fixed by tightness on the entry that opens it.
template <typename Scalar, typename Cost = PowerCost<Scalar>>
PlanWithPotentials<Scalar> northwest_corner_with_potentials(const SortedSlice<Scalar>& a,
                                                            const SortedSlice<Scalar>& b,
                                                            const Cost& cost = Cost{},
                                                            NwTie tie = NwTie::AdvanceRow) {
  require_equal_mass(a.mass(), b.mass());
  const Index n = a.size(), m = b.size();
  PlanWithPotentials<Scalar> out;
  out.plan.n = n;
  out.plan.m = m;
  auto& f = out.potentials.f;
  auto& g = out.potentials.g;
  f.assign(static_cast<std::size_t>(n), Scalar(0));
  g.assign(static_cast<std::size_t>(m), Scalar(0));
  const auto x = [&](Index i) { return a.values[static_cast<std::size_t>(i)]; };
  const auto y = [&](Index j) { return b.values[static_cast<std::size_t>(j)]; };

  Index i = 0, j = 0;
  Scalar ra = a.weights[0], rb = b.weights[0];
  g[0] = cost(x(0), y(0));
  while (i < n - 1 || j < m - 1) {
    const bool row_first = tie == NwTie::AdvanceRow ? ra <= rb : ra < rb;
    const bool advance_row = (i < n - 1 && (row_first || j == m - 1));
    if (advance_row) {
      if (ra > 0) out.plan.entries.push_back({i, j, ra});
      rb -= ra;
      ++i;
      ra = a.weights[static_cast<std::size_t>(i)];
      f[static_cast<std::size_t>(i)] = cost(x(i), y(j)) - g[static_cast<std::size_t>(j)];
    } else {
      if (rb > 0) out.plan.entries.push_back({i, j, rb});
      ra -= rb;
      ++j;
      rb = b.weights[static_cast<std::size_t>(j)];
      g[static_cast<std::size_t>(j)] = cost(x(i), y(j)) - f[static_cast<std::size_t>(i)];
    }
  }
  // Last cell carries whatever remains; ra and rb agree up to rounding.
  const Scalar last = std::min(ra, rb);
  if (last > 0) out.plan.entries.push_back({n - 1, m - 1, last});
  return out;
}

/// Transport cost sum_{(i,j)} pi_ij c(x_i, y_j) of a sorted-space plan.
template <typename Scalar, typename Cost = PowerCost<Scalar>>
Scalar plan_cost(const Plan1D<Scalar>& plan, const SortedSlice<Scalar>& a, const SortedSlice<Scalar>& b,
                 const Cost& cost = Cost{}) {
  Scalar acc = 0;
  for (const auto& e : plan.entries)
    acc += e.mass * cost(a.values[static_cast<std::size_t>(e.i)], b.values[static_cast<std::size_t>(e.j)]);
  return acc;
}

template <typename Scalar>
Scalar dual_value(const DualPotentials<Scalar>& pot, const SortedSlice<Scalar>& a, const SortedSlice<Scalar>& b) {
  Scalar acc = 0;
  for (std::size_t i = 0; i < pot.f.size(); ++i) acc += pot.f[i] * a.weights[i];
  for (std::size_t j = 0; j < pot.g.size(); ++j) acc += pot.g[j] * b.weights[j];
  return acc;
}

/// Sorted matching cost (1/n) sum |x_(i) - y_(i)|^p between uniform slices of
/// equal size.
template <typename Scalar>
Scalar monge_sort_cost(const SortedSlice<Scalar>& a, const SortedSlice<Scalar>& b, Scalar p) {
  detail::require_p(p);
  if (a.size() != b.size()) fail(ErrorCode::DimensionMismatch, "monge_sort_cost needs equal atom counts");
  const Scalar w = a.weights[0];
  const auto uniform_like = [&](const SortedSlice<Scalar>& s) {
    return std::all_of(s.weights.begin(), s.weights.end(),
                       [&](Scalar v) { return std::abs(v - w) <= Scalar(1e-12) * std::max(Scalar(1), w); });
  };
  if (!uniform_like(a) || !uniform_like(b))
    fail(ErrorCode::InvalidArgument, "monge_sort_cost needs uniform equal weights");
  const PowerCost<Scalar> cost{p};
  Scalar acc = 0;
  for (std::size_t k = 0; k < a.values.size(); ++k) acc += w * cost(a.values[k], b.values[k]);
  return acc;
}

/// Generalized inverse CDF at normalized level t in [0, 1]:
/// inf{y : t * mass <= F(y)}, with t = 0 mapping to the smallest atom.
template <typename Scalar>
Scalar quantile(const SortedSlice<Scalar>& s, Scalar t) {
  if (!(t >= 0 && t <= 1)) fail(ErrorCode::InvalidArgument, "quantile level outside [0, 1]");
  const Scalar level = t * s.mass();
  auto it = std::lower_bound(s.cum_weights.begin(), s.cum_weights.end(), level);
  if (it == s.cum_weights.end()) return s.values.back();
  return s.values[static_cast<std::size_t>(it - s.cum_weights.begin())];
}

/// F(x) = sum_i w_i 1[v_i <= x] (unnormalized).
template <typename Scalar>
Scalar cdf(const SortedSlice<Scalar>& s, Scalar x) {
  auto it = std::upper_bound(s.values.begin(), s.values.end(), x);
  if (it == s.values.begin()) return Scalar(0);
  return s.cum_weights[static_cast<std::size_t>(it - s.values.begin() - 1)];
}

namespace quadrature {
struct Exact {};
struct Stochastic {
  int K;
  RngStream rng;
};
struct EquallySpaced {
  int K;
};
struct Trimmed {
  double delta;
  int K;
};
}  // namespace quadrature

using Quadrature =
    std::variant<quadrature::Exact, quadrature::Stochastic, quadrature::EquallySpaced, quadrature::Trimmed>;

/// W_p^p between two slices of equal mass. Exact integrates the step quantile
/// functions analytically via the north-west corner; the other rules average
/// the cost at K quantile levels.
template <typename Scalar>
Scalar wasserstein_1d(const SortedSlice<Scalar>& a, const SortedSlice<Scalar>& b, Scalar p,
                      Quadrature rule = quadrature::Exact{}) {
  detail::require_p(p);
  require_equal_mass(a.mass(), b.mass());
  const PowerCost<Scalar> cost{p};
  const Scalar mass = a.mass();
  const auto at = [&](Scalar t) { return cost(quantile(a, t), quantile(b, t)); };
  return std::visit(
      [&](auto& q) -> Scalar {
        using Q = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<Q, quadrature::Exact>) {
          return plan_cost(northwest_corner(a, b), a, b, cost);
        } else if constexpr (std::is_same_v<Q, quadrature::Stochastic>) {
          if (q.K < 1) fail(ErrorCode::InvalidArgument, "quadrature needs K >= 1");
          Scalar acc = 0;
          for (int k = 0; k < q.K; ++k) acc += at(static_cast<Scalar>(q.rng.uniform()));
          return mass * acc / Scalar(q.K);
        } else if constexpr (std::is_same_v<Q, quadrature::EquallySpaced>) {
          if (q.K < 1) fail(ErrorCode::InvalidArgument, "quadrature needs K >= 1");
          Scalar acc = 0;
          for (int k = 0; k < q.K; ++k) acc += at((Scalar(k) + Scalar(0.5)) / Scalar(q.K));
          return mass * acc / Scalar(q.K);
        } else {
          if (q.K < 1) fail(ErrorCode::InvalidArgument, "quadrature needs K >= 1");
          if (!(q.delta >= 0 && q.delta < 0.5)) fail(ErrorCode::InvalidArgument, "trim level must lie in [0, 0.5)");
          const Scalar lo = static_cast<Scalar>(q.delta);
          const Scalar span = Scalar(1) - 2 * lo;
          Scalar acc = 0;
          for (int k = 0; k < q.K; ++k) acc += at(lo + span * (Scalar(k) + Scalar(0.5)) / Scalar(q.K));
          return mass * acc / Scalar(q.K);
        }
      },
      rule);
}

/// Monotone map T = F_b^{-1} o F_a evaluated at a point, using normalized CDFs.
template <typename Scalar>
Scalar monotone_map(const SortedSlice<Scalar>& from, const SortedSlice<Scalar>& to, Scalar x) {
  const Scalar t = std::clamp(cdf(from, x) / from.mass(), Scalar(0), Scalar(1));
  return quantile(to, t);
}

}  // namespace slicedot
