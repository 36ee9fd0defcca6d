#include "slicedot/extensions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace slicedot {

namespace {

void check_betas(const std::vector<double>& betas, std::size_t K) {
  if (K == 0) fail(ErrorCode::EmptyInput, "multi-marginal cost needs at least one marginal");
  if (betas.size() != K) fail(ErrorCode::DimensionMismatch, "one beta per marginal required");
  double sum = 0;
  for (std::size_t k = 0; k < K; ++k) {
    if (!(betas[k] > 0)) fail(ErrorCode::InvalidArgument, "betas must be > 0", k);
    sum += betas[k];
  }
  if (std::abs(sum - 1) > 1e-9) fail(ErrorCode::InvalidArgument, "betas must sum to 1");
}

}  // namespace

double smw_slice_direct(const std::vector<Slice>& slices, const std::vector<double>& betas) {
  check_betas(betas, slices.size());
  const double mass = slices.front().mass();
  for (const auto& s : slices) require_equal_mass(s.mass(), mass);
  std::vector<double> breaks{0.0, 1.0};
  for (const auto& s : slices)
    for (double c : s.cum_weights) breaks.push_back(std::min(1.0, c / s.mass()));
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  double acc = 0;
  std::vector<double> q(slices.size());
  for (std::size_t r = 1; r < breaks.size(); ++r) {
    const double len = breaks[r] - breaks[r - 1];
    if (!(len > 0)) continue;
    const double mid = 0.5 * (breaks[r] + breaks[r - 1]);
    double bary = 0;
    for (std::size_t k = 0; k < slices.size(); ++k) {
      q[k] = quantile(slices[k], mid);
      bary += betas[k] * q[k];
    }
    double dev = 0;
    for (std::size_t k = 0; k < slices.size(); ++k) dev += betas[k] * (q[k] - bary) * (q[k] - bary);
    acc += len * dev;
  }
  return mass * acc;
}

double smw_slice_pairwise(const std::vector<Slice>& slices, const std::vector<double>& betas) {
  check_betas(betas, slices.size());
  double acc = 0;
  for (std::size_t k = 0; k < slices.size(); ++k)
    for (std::size_t l = k + 1; l < slices.size(); ++l)
      acc += betas[k] * betas[l] * wasserstein_1d(slices[k], slices[l], 2.0);
  return acc;
}

double smw(const std::vector<Measure>& measures, const std::vector<double>& betas, const DirectionSet& ds,
           const Projector& proj) {
  check_betas(betas, measures.size());
  for (std::size_t k = 0; k < measures.size(); ++k)
    if (measures[k].dim() != measures.front().dim())
      fail(ErrorCode::DimensionMismatch, "marginals differ in dimension", k);
  double acc = 0;
  std::vector<Slice> slices;
  for (Index l = 0; l < ds.size(); ++l) {
    const Eigen::VectorXd th = ds.theta(l);
    slices.clear();
    for (const auto& m : measures) slices.push_back(project(m, proj, th));
    acc += smw_slice_direct(slices, betas);
  }
  return acc / static_cast<double>(ds.size());
}

namespace {

double uniform_weight(const Slice& s, const char* which) {
  const double w = s.weights.front();
  for (std::size_t i = 0; i < s.weights.size(); ++i)
    if (std::abs(s.weights[i] - w) > 1e-12 * std::max(1.0, w))
      fail(ErrorCode::InvalidArgument, std::string(which) + " must have uniform weights", i);
  if (!(w > 0)) fail(ErrorCode::InvalidArgument, std::string(which) + " weights must be > 0");
  return w;
}

// Sorted matching of the active atoms; returns the summed |x - y|.
double active_cost(const Slice& a, const Slice& b, const std::vector<char>& act_a, const std::vector<char>& act_b,
                   std::vector<std::pair<Index, Index>>* pairs = nullptr) {
  double acc = 0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < act_a.size(); ++i) {
    if (!act_a[i]) continue;
    while (!act_b[j]) ++j;
    acc += std::abs(a.values[i] - b.values[j]);
    if (pairs) pairs->emplace_back(static_cast<Index>(i), static_cast<Index>(j));
    ++j;
  }
  return acc;
}

}  // namespace

PartialAssignment pot_1d(const Slice& a, const Slice& b, double s) {
  const double w = uniform_weight(a, "first slice");
  const double wb = uniform_weight(b, "second slice");
  if (std::abs(w - wb) > 1e-12 * std::max(1.0, w))
    fail(ErrorCode::InvalidArgument, "partial assignment needs the same atom weight on both sides");
  const double cap = std::min(a.mass(), b.mass());
  if (!(s > 0) || s > cap * (1 + 1e-12)) fail(ErrorCode::InvalidArgument, "transported mass s out of range");
  {
    std::size_t i = 0, j = 0;
    while (i < a.values.size() && j < b.values.size()) {
      if (a.values[i] == b.values[j])
        fail(ErrorCode::OverlappingSupports, "partial assignment needs disjoint supports", i);
      if (a.values[i] < b.values[j])
        ++i;
      else
        ++j;
    }
  }
  const auto n = a.values.size(), m = b.values.size();
  const double ratio = s / w;
  auto k_floor = static_cast<std::size_t>(std::floor(ratio + 1e-9));
  double frac = ratio - static_cast<double>(k_floor);
  if (frac < 1e-9) frac = 0;
  k_floor = std::min(k_floor, std::min(n, m));
  const std::size_t k_ceil = frac > 0 ? k_floor + 1 : k_floor;

  // Merged order of all atoms: (value, side, index).
  struct Node {
    double v;
    int side;
    std::size_t idx;
  };
  std::vector<Node> merged;
  merged.reserve(n + m);
  for (std::size_t i = 0; i < n; ++i) merged.push_back({a.values[i], 0, i});
  for (std::size_t j = 0; j < m; ++j) merged.push_back({b.values[j], 1, j});
  std::stable_sort(merged.begin(), merged.end(), [](const Node& x, const Node& y) { return x.v < y.v; });

  std::vector<char> act_a(n, 0), act_b(m, 0);
  std::vector<double> costs{0.0};
  std::vector<std::pair<std::size_t, std::size_t>> cand;
  for (std::size_t step = 0; step < k_ceil; ++step) {
    cand.clear();
    // Each free atom with the nearest free atom of the other measure on either side.
    for (std::size_t p = 0; p < merged.size(); ++p) {
      const Node& u = merged[p];
      const bool free_u = u.side == 0 ? !act_a[u.idx] : !act_b[u.idx];
      if (!free_u) continue;
      for (int dir : {-1, 1}) {
        for (std::ptrdiff_t q = static_cast<std::ptrdiff_t>(p) + dir;
             q >= 0 && q < static_cast<std::ptrdiff_t>(merged.size()); q += dir) {
          const Node& v = merged[static_cast<std::size_t>(q)];
          if (v.side == u.side) continue;
          const bool free_v = v.side == 0 ? !act_a[v.idx] : !act_b[v.idx];
          if (!free_v) continue;
          cand.emplace_back(u.side == 0 ? u.idx : v.idx, u.side == 0 ? v.idx : u.idx);
          break;
        }
      }
    }
    double best = std::numeric_limits<double>::infinity();
    std::pair<std::size_t, std::size_t> pick{0, 0};
    for (const auto& [i, j] : cand) {
      act_a[i] = act_b[j] = 1;
      const double c = active_cost(a, b, act_a, act_b);
      act_a[i] = act_b[j] = 0;
      if (c < best) {
        best = c;
        pick = {i, j};
      }
    }
    act_a[pick.first] = act_b[pick.second] = 1;
    costs.push_back(w * best);
  }

  PartialAssignment out;
  active_cost(a, b, act_a, act_b, &out.pairs);
  const double ck = costs[k_floor];
  out.cost = frac > 0 ? ck + frac * (costs[k_ceil] - ck) : ck;
  out.transported_mass = s;
  return out;
}

PartialAssignment opot_1d_assign(const std::vector<double>& X, const std::vector<double>& Y) {
  const std::size_t n = X.size(), m = Y.size();
  if (n > m) fail(ErrorCode::InvalidArgument, "one-sided assignment needs n <= m");
  if (!std::is_sorted(X.begin(), X.end()) || !std::is_sorted(Y.begin(), Y.end()))
    fail(ErrorCode::InvalidArgument, "one-sided assignment needs sorted inputs");
  PartialAssignment out;
  if (n == 0) return out;
  const auto sq = [](double v) { return v * v; };
  const auto nearest = [&](double x) {
    const auto it = std::lower_bound(Y.begin(), Y.end(), x);
    std::size_t hi = static_cast<std::size_t>(it - Y.begin());
    if (hi == m) return m - 1;
    if (hi == 0) return std::size_t{0};
    return sq(x - Y[hi - 1]) <= sq(x - Y[hi]) ? hi - 1 : hi;
  };

  std::vector<std::ptrdiff_t> sigma(n);
  std::vector<char> taken(m, 0);
  sigma[0] = static_cast<std::ptrdiff_t>(nearest(X[0]));
  taken[static_cast<std::size_t>(sigma[0])] = 1;
  for (std::size_t k = 1; k < n; ++k) {
    const auto t = static_cast<std::ptrdiff_t>(nearest(X[k]));
    const std::ptrdiff_t last = sigma[k - 1];
    if (t > last) {
      sigma[k] = t;
      taken[static_cast<std::size_t>(t)] = 1;
      continue;
    }
    // Trailing run of consecutive taken targets ending at `last`.
    std::ptrdiff_t z = last;
    while (z >= 0 && taken[static_cast<std::size_t>(z)]) --z;
    std::size_t r = k;
    while (r > 0 && sigma[r - 1] > z) --r;

    double case1 = std::numeric_limits<double>::infinity();
    if (z >= 0) {
      case1 = sq(X[k] - Y[static_cast<std::size_t>(last)]);
      for (std::size_t i = r; i < k; ++i) {
        const auto si = static_cast<std::size_t>(sigma[i]);
        case1 += sq(X[i] - Y[si - 1]) - sq(X[i] - Y[si]);
      }
    }
    double case2 = std::numeric_limits<double>::infinity();
    if (last + 1 < static_cast<std::ptrdiff_t>(m)) case2 = sq(X[k] - Y[static_cast<std::size_t>(last + 1)]);

    if (case1 < case2) {
      taken[static_cast<std::size_t>(z)] = 1;
      for (std::size_t i = r; i < k; ++i) --sigma[i];
      sigma[k] = last;
    } else {
      sigma[k] = last + 1;
      taken[static_cast<std::size_t>(last + 1)] = 1;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.pairs.emplace_back(static_cast<Index>(i), static_cast<Index>(sigma[i]));
    out.cost += sq(X[i] - Y[static_cast<std::size_t>(sigma[i])]);
  }
  out.transported_mass = static_cast<double>(n);
  return out;
}

double sliced_partial(const Measure& mu, const Measure& nu, double s_fraction, const DirectionSet& ds,
                      PartialMode mode, const Projector& proj) {
  if (mu.dim() != nu.dim()) fail(ErrorCode::DimensionMismatch, "measures live in different dimensions");
  if (mode == PartialMode::Limited && (!(s_fraction > 0) || s_fraction > 1))
    fail(ErrorCode::InvalidArgument, "mass fraction must lie in (0, 1]");
  double acc = 0;
  for (Index l = 0; l < ds.size(); ++l) {
    const Eigen::VectorXd th = ds.theta(l);
    const Slice a = project(mu, proj, th), b = project(nu, proj, th);
    if (mode == PartialMode::Limited) {
      acc += pot_1d(a, b, s_fraction * std::min(a.mass(), b.mass())).cost;
    } else {
      uniform_weight(a, "first measure");
      uniform_weight(b, "second measure");
      acc += a.size() <= b.size() ? opot_1d_assign(a.values, b.values).cost : opot_1d_assign(b.values, a.values).cost;
    }
  }
  return acc / static_cast<double>(ds.size());
}

double kl_conjugate(double x, double rho) { return -rho * std::expm1(-x / rho); }

namespace {

double log_sum_exp_weighted(const std::vector<double>& w, const std::vector<double>& pot, double rho) {
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] > 0) top = std::max(top, std::log(w[i]) - pot[i] / rho);
  double acc = 0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] > 0) acc += std::exp(std::log(w[i]) - pot[i] / rho - top);
  return top + std::log(acc);
}

Slice reweighted(const Slice& s, const std::vector<double>& w) {
  Slice out = s;
  double acc = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    out.weights[i] = w[i];
    acc += w[i];
    out.cum_weights[i] = acc;
  }
  return out;
}

}  // namespace

UotResult uot_1d_fw(const Slice& a, const Slice& b, double rho1, double rho2, double p, int iters) {
  if (!(rho1 > 0) || !(rho2 > 0)) fail(ErrorCode::InvalidArgument, "KL penalties need rho > 0");
  if (iters < 1) fail(ErrorCode::InvalidArgument, "Frank-Wolfe needs iters >= 1");
  detail::require_p(p);
  const PowerCost<double> cost{p};
  const std::size_t n = a.values.size(), m = b.values.size();
  std::vector<double> f(n, 0.0), g(m, 0.0), wa(n), wb(m);
  const double kappa = rho1 * rho2 / (rho1 + rho2);

  const auto lambda_star = [&]() {
    return kappa * (log_sum_exp_weighted(a.weights, f, rho1) - log_sum_exp_weighted(b.weights, g, rho2));
  };
  const auto dual_at = [&](double lam) {
    double acc = 0;
    for (std::size_t i = 0; i < n; ++i) acc += a.weights[i] * kl_conjugate(f[i] + lam, rho1);
    for (std::size_t j = 0; j < m; ++j) acc += b.weights[j] * kl_conjugate(g[j] - lam, rho2);
    return acc;
  };

  UotResult out;
  for (int t = 0; t < iters; ++t) {
    const double lam = lambda_star();
    const double la = log_sum_exp_weighted(a.weights, f, rho1) - lam / rho1;
    const double lb = log_sum_exp_weighted(b.weights, g, rho2) + lam / rho2;
    // Both reweighted measures have the same mass; normalize to probabilities.
    for (std::size_t i = 0; i < n; ++i)
      wa[i] = a.weights[i] > 0 ? std::exp(std::log(a.weights[i]) - (f[i] + lam) / rho1 - la) : 0.0;
    for (std::size_t j = 0; j < m; ++j)
      wb[j] = b.weights[j] > 0 ? std::exp(std::log(b.weights[j]) - (g[j] - lam) / rho2 - lb) : 0.0;
    const double sa = std::accumulate(wa.begin(), wa.end(), 0.0), sb = std::accumulate(wb.begin(), wb.end(), 0.0);
    for (auto& v : wa) v /= sa;
    for (auto& v : wb) v /= sb;
    // Midpoint of the two extreme optimal duals; at mu = nu it is the zero direction.
    const Slice ra = reweighted(a, wa), rb = reweighted(b, wb);
    const auto lo = northwest_corner_with_potentials(ra, rb, cost, NwTie::AdvanceRow).potentials;
    const auto hi = northwest_corner_with_potentials(ra, rb, cost, NwTie::AdvanceColumn).potentials;
    const double gamma = 2.0 / (t + 3.0);
    for (std::size_t i = 0; i < n; ++i) f[i] = (1 - gamma) * f[i] + gamma * 0.5 * (lo.f[i] + hi.f[i]);
    for (std::size_t j = 0; j < m; ++j) g[j] = (1 - gamma) * g[j] + gamma * 0.5 * (lo.g[j] + hi.g[j]);
    out.trajectory.push_back(dual_at(lambda_star()));
  }
  const double lam = lambda_star();
  for (auto& v : f) v += lam;
  for (auto& v : g) v -= lam;
  out.dual_value = dual_at(0.0);
  out.f = std::move(f);
  out.g = std::move(g);
  out.iterations = iters;
  if (!std::isfinite(out.dual_value)) fail(ErrorCode::Numerical, "unbalanced dual diverged");
  return out;
}

double suot(const Measure& mu, const Measure& nu, double rho1, double rho2, const DirectionSet& ds, int iters,
            double p, const Projector& proj) {
  if (mu.dim() != nu.dim()) fail(ErrorCode::DimensionMismatch, "measures live in different dimensions");
  double acc = 0;
  for (Index l = 0; l < ds.size(); ++l) {
    const Eigen::VectorXd th = ds.theta(l);
    acc += uot_1d_fw(project(mu, proj, th), project(nu, proj, th), rho1, rho2, p, iters).dual_value;
  }
  return acc / static_cast<double>(ds.size());
}

double gw_sorted_slice(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size()) fail(ErrorCode::DimensionMismatch, "Gromov heuristic needs equal atom counts");
  if (n == 0) fail(ErrorCode::EmptyInput, "Gromov heuristic needs atoms");
  double asc = 0, desc = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = i + 1; k < n; ++k) {
      const double dx = (x[i] - x[k]) * (x[i] - x[k]);
      const double da = (y[i] - y[k]) * (y[i] - y[k]);
      const double dd = (y[n - 1 - i] - y[n - 1 - k]) * (y[n - 1 - i] - y[n - 1 - k]);
      asc += (dx - da) * (dx - da);
      desc += (dx - dd) * (dx - dd);
    }
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  return 2 * std::min(asc, desc) / nn;
}

double sgw_heuristic(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, const DirectionSet& ds) {
  if (X.rows() != Y.rows()) fail(ErrorCode::DimensionMismatch, "Gromov heuristic needs equal point counts");
  const Index D = std::max(X.cols(), Y.cols());
  if (ds.dim() != D) fail(ErrorCode::DimensionMismatch, "directions must live in the larger dimension");
  const auto pad = [D](const Eigen::MatrixXd& P) {
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(P.rows(), D);
    Q.leftCols(P.cols()) = P;
    return Q;
  };
  const Eigen::MatrixXd Xp = pad(X), Yp = pad(Y);
  double acc = 0;
  std::vector<double> px(static_cast<std::size_t>(X.rows())), py(px.size());
  for (Index l = 0; l < ds.size(); ++l) {
    const Eigen::VectorXd th = ds.theta(l);
    Eigen::VectorXd::Map(px.data(), X.rows()) = Xp * th;
    Eigen::VectorXd::Map(py.data(), Y.rows()) = Yp * th;
    std::sort(px.begin(), px.end());
    std::sort(py.begin(), py.end());
    acc += gw_sorted_slice(px, py);
  }
  return acc / static_cast<double>(ds.size());
}

}  // namespace slicedot
