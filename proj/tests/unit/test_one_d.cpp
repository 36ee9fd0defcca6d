#include <doctest.h>

#include <numeric>

#include "slicedot/slicedot.hpp"
#include "support/oracles.hpp"

using namespace slicedot;

namespace {
Slice uni(std::vector<double> v) { return Slice::uniform(v); }
}  // namespace

TEST_CASE("monge_sort_cost examples") {
  CHECK(monge_sort_cost(uni({1, 2, 3}), uni({2, 3, 4}), 1.0) == doctest::Approx(1.0));
  CHECK(monge_sort_cost(uni({0.3, -1, 7}), uni({0.3, -1, 7}), 2.5) == 0.0);
  CHECK(monge_sort_cost(uni({0, 1}), uni({1, 0}), 2.0) == 0.0);
  CHECK_THROWS_AS(monge_sort_cost(uni({0, 1}), uni({1}), 2.0), Error);
  CHECK_THROWS_AS(monge_sort_cost(Slice::from_values({0, 1}, {0.2, 0.8}), uni({0, 1}), 2.0), Error);
}

TEST_CASE("northwest corner hand example") {
  const Slice a = Slice::from_values({0, 1}, {0.5, 0.5}), b = Slice::from_values({0, 1}, {0.3, 0.7});
  const auto plan = northwest_corner(a, b);
  REQUIRE(plan.entries.size() == 3);
  const double want[3][3] = {{0, 0, .3}, {0, 1, .2}, {1, 1, .5}};
  for (int k = 0; k < 3; ++k) {
    CHECK(plan.entries[k].i == want[k][0]);
    CHECK(plan.entries[k].j == want[k][1]);
    CHECK(plan.entries[k].mass == doctest::Approx(want[k][2]));
  }
}

TEST_CASE("northwest corner diagonal and forced splitting") {
  const auto diag = northwest_corner(uni({1, 2, 3}), uni({1, 2, 3}));
  REQUIRE(diag.entries.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) CHECK(diag.entries[k].i == diag.entries[k].j);
  const auto split = northwest_corner(Slice::from_values({0}, {1.0}), uni({1, 2, 3}));
  CHECK(split.entries.size() == 3);
  CHECK_THROWS_AS(northwest_corner(uni({0}), Slice::from_values({0}, {2.0})), Error);
}

TEST_CASE("plan invariants on random slices") {
  RngStream rng(3, 3);
  for (int inst = 0; inst < 50; ++inst) {
    const int n = 1 + static_cast<int>(rng.uniform() * 8), m = 1 + static_cast<int>(rng.uniform() * 8);
    std::vector<double> x(n), y(m), a(n), b(m);
    for (auto& v : x) v = rng.normal();
    for (auto& v : y) v = rng.normal();
    for (auto& v : a) v = rng.uniform() + 0.1;
    for (auto& v : b) v = rng.uniform() + 0.1;
    const double sa = std::accumulate(a.begin(), a.end(), 0.0), sb = std::accumulate(b.begin(), b.end(), 0.0);
    for (auto& v : a) v /= sa;
    for (auto& v : b) v /= sb;
    const Slice A = Slice::from_values(x, a), B = Slice::from_values(y, b);
    const auto plan = northwest_corner(A, B);
    CHECK(static_cast<int>(plan.entries.size()) <= n + m - 1);
    std::vector<double> rows(n, 0), cols(m, 0);
    for (std::size_t k = 0; k < plan.entries.size(); ++k) {
      rows[plan.entries[k].i] += plan.entries[k].mass;
      cols[plan.entries[k].j] += plan.entries[k].mass;
      CHECK(plan.entries[k].mass > 0);
      if (k > 0) {
        CHECK(plan.entries[k].i >= plan.entries[k - 1].i);
        CHECK(plan.entries[k].j >= plan.entries[k - 1].j);
      }
    }
    for (int i = 0; i < n; ++i) CHECK(std::abs(rows[i] - A.weights[i]) <= 1e-10);
    for (int j = 0; j < m; ++j) CHECK(std::abs(cols[j] - B.weights[j]) <= 1e-10);
    for (std::size_t k = 1; k < A.cum_weights.size(); ++k) CHECK(A.cum_weights[k] > A.cum_weights[k - 1]);
  }
}

TEST_CASE("potentials: identical slices and the 2x2 LP example") {
  const Slice a = uni({0, 1, 2});
  const auto res = northwest_corner_with_potentials(a, a, PowerCost<double>{2.0});
  CHECK(plan_cost(res.plan, a, a, PowerCost<double>{2.0}) == 0.0);
  CHECK(dual_value(res.potentials, a, a) == doctest::Approx(0.0));

  const Slice x = Slice::from_values({0, 1}, {0.5, 0.5}), y = Slice::from_values({0, 2}, {0.3, 0.7});
  const PowerCost<double> c{1.0};
  const auto r = northwest_corner_with_potentials(x, y, c);
  Eigen::MatrixXd C(2, 2);
  C << 0, 2, 1, 1;
  const double lp = oracle::transport_lp(Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(0.3, 0.7), C);
  CHECK(plan_cost(r.plan, x, y, c) == doctest::Approx(lp).epsilon(1e-12));
  CHECK(dual_value(r.potentials, x, y) == doctest::Approx(lp).epsilon(1e-12));
}

TEST_CASE("potentials with a single atom on either side") {
  const PowerCost<double> c{2.0};
  for (const auto& [a, b] : {std::pair{Slice::from_values({0.5}, {1.0}), uni({-1, 0, 3})},
                             std::pair{uni({-1, 0, 3}), Slice::from_values({0.5}, {1.0})}}) {
    const auto r = northwest_corner_with_potentials(a, b, c);
    CHECK(plan_cost(r.plan, a, b, c) == doctest::Approx(dual_value(r.potentials, a, b)).epsilon(1e-12));
    for (std::size_t i = 0; i < a.values.size(); ++i)
      for (std::size_t j = 0; j < b.values.size(); ++j)
        CHECK(r.potentials.f[i] + r.potentials.g[j] <= c(a.values[i], b.values[j]) + 1e-9);
  }
}

TEST_CASE("wasserstein_1d examples") {
  const Slice s = Slice::from_values({0.1, 0.4, 2}, {0.2, 0.5, 0.3});
  CHECK(wasserstein_1d(s, s, 2.0) == 0.0);
  CHECK(wasserstein_1d(s, s, 2.0, quadrature::EquallySpaced{50}) == 0.0);
  CHECK(wasserstein_1d(s, s, 2.0, quadrature::Trimmed{0.1, 50}) == 0.0);
  CHECK(wasserstein_1d(s, s, 2.0, quadrature::Stochastic{50, RngStream(1, 1)}) == 0.0);
  CHECK(wasserstein_1d(uni({0}), uni({1}), 2.0) == 1.0);
  CHECK(wasserstein_1d(uni({1, 2, 3}), uni({2, 3, 4}), 1.0, quadrature::EquallySpaced{300}) ==
        doctest::Approx(1.0).epsilon(0.01));
  CHECK_THROWS_AS(wasserstein_1d(s, s, 2.0, quadrature::Trimmed{0.5, 10}), Error);
  CHECK_THROWS_AS(wasserstein_1d(s, s, 0.5), Error);
  CHECK_THROWS_AS(wasserstein_1d(s, uni({0}), 2.0, quadrature::EquallySpaced{0}), Error);
}

TEST_CASE("monge cost equals exact W for uniform equal-size slices") {
  RngStream rng(9, 0);
  for (int inst = 0; inst < 20; ++inst) {
    std::vector<double> x(7), y(7);
    for (auto& v : x) v = rng.normal();
    for (auto& v : y) v = rng.normal();
    CHECK(monge_sort_cost(uni(x), uni(y), 2.0) == doctest::Approx(wasserstein_1d(uni(x), uni(y), 2.0)).epsilon(1e-14));
  }
}

TEST_CASE("wasserstein_1d symmetry and triangle inequality") {
  RngStream rng(10, 0);
  for (int inst = 0; inst < 50; ++inst) {
    std::vector<Slice> s;
    for (int k = 0; k < 3; ++k) {
      const int n = 1 + static_cast<int>(rng.uniform() * 6);
      std::vector<double> v(n), w(n);
      for (auto& x : v) x = rng.normal();
      for (auto& x : w) x = 1.0 / n;
      s.push_back(Slice::from_values(v, w));
    }
    for (double p : {1.0, 2.0, 3.0}) {
      const double ab = wasserstein_1d(s[0], s[1], p), ba = wasserstein_1d(s[1], s[0], p);
      CHECK(ab == doctest::Approx(ba).epsilon(1e-14));
      const auto W = [&](int i, int j) { return std::pow(wasserstein_1d(s[i], s[j], p), 1.0 / p); };
      CHECK(W(0, 2) <= W(0, 1) + W(1, 2) + 1e-12);
    }
  }
}

TEST_CASE("quantile and cdf conventions") {
  const Slice s = Slice::from_values({0, 1}, {0.3, 0.7});
  CHECK(quantile(s, 0.3) == 0.0);
  CHECK(quantile(s, 0.5) == 1.0);
  CHECK(quantile(s, 0.0) == 0.0);
  CHECK(quantile(s, 1.0) == 1.0);
  CHECK(cdf(s, -1.0) == 0.0);
  CHECK(cdf(s, 1.0) == doctest::Approx(1.0));
  CHECK(cdf(s, 5.0) == doctest::Approx(1.0));
  CHECK(cdf(s, 0.0) == doctest::Approx(0.3));
  CHECK_THROWS_AS(quantile(s, 1.5), Error);
  CHECK_THROWS_AS(quantile(s, -0.1), Error);
}

TEST_CASE("monotone_map sends sorted atoms to sorted atoms") {
  const Slice a = uni({3, 1, 2}), b = uni({10, 30, 20});
  CHECK(monotone_map(a, b, 1.0) == 10.0);
  CHECK(monotone_map(a, b, 2.0) == 20.0);
  CHECK(monotone_map(a, b, 3.0) == 30.0);
}

TEST_CASE("spline: identity segment, inverse, derivative") {
  const RationalQuadraticSpline<double> id({0, 1}, {0, 1}, {1, 1});
  CHECK(id(0.5) == doctest::Approx(0.5));

  const Slice s = Slice::from_values({0, 0.5, 2, 2.2, 4}, {0.1, 0.3, 0.2, 0.25, 0.15});
  const auto sp = spline_fit(s);
  for (int k = 1; k < 100; ++k) {
    const double x = 4.0 * k / 100.0;
    CHECK(sp(sp.inverse(x)) == doctest::Approx(x).epsilon(1e-10));
  }
  const double h = 1e-6;
  const auto& t = sp.knots_t();
  for (int k = 1; k < 200; ++k) {
    const double u = t.front() + (t.back() - t.front()) * k / 200.0;
    if (std::any_of(t.begin(), t.end(), [&](double kt) { return std::abs(kt - u) < 2 * h; })) continue;
    const double fd = (sp(u + h) - sp(u - h)) / (2 * h);
    CHECK(sp.derivative(u) == doctest::Approx(fd).epsilon(1e-6));
  }
  for (int k = 1; k < 100; ++k) CHECK(sp(t.back() * k / 100.0) >= sp(t.back() * (k - 1) / 100.0));
  const QuantileFn<double> q = sp;
  CHECK(quantile(q, 0.0) == sp(0.0));
  CHECK_THROWS_AS(spline_fit(Slice::from_values({1, 1}, {0.5, 0.5})), Error);
  CHECK_THROWS_AS(RationalQuadraticSpline<double>({0, 1}, {1, 0}, {1, 1}), Error);
}

TEST_CASE("kll: exact below capacity") {
  KllSketch sk(50, RngStream(1, 0));
  std::vector<double> xs;
  RngStream rng(2, 0);
  for (int i = 0; i < 40; ++i) {
    xs.push_back(rng.normal());
    sk.insert(xs.back());
  }
  const Slice s = sk.to_slice();
  const Slice exact = Slice::uniform(xs);
  CHECK(s.values == exact.values);
  for (std::size_t k = 0; k < s.weights.size(); ++k) CHECK(s.weights[k] == doctest::Approx(exact.weights[k]));
  CHECK_THROWS_AS(sk.insert(std::nan("")), Error);
}

TEST_CASE("kll: median of 1..100000 within 2% rank") {
  KllSketch sk(200, RngStream(4, 0));
  RngStream rng(4, 1);
  std::vector<double> xs(100000);
  std::iota(xs.begin(), xs.end(), 1.0);
  for (std::size_t k = xs.size(); k > 1; --k) std::swap(xs[k - 1], xs[static_cast<std::size_t>(rng.uniform() * k)]);
  for (double x : xs) sk.insert(x);
  const double med = quantile(sk.to_slice(), 0.5);
  CHECK(std::abs(med - 50000.0) <= 2000.0);
  CHECK(sk.items_seen() == 100000);
  const int H = sk.height();
  CHECK(H <= std::log2(100000.0 / 200.0) + 2);
  CHECK(sk.retained() <= static_cast<std::size_t>(3 * 200 + 2 * H));
  double total = 0;
  for (int h = 0; h < H; ++h) total += std::ldexp(1.0, h) * static_cast<double>(sk.levels()[h].size());
  CHECK(total == 100000.0);
}

TEST_CASE("kll: merge and serialization") {
  KllSketch a(64, RngStream(1, 0)), b(64, RngStream(1, 1));
  for (int i = 0; i < 5000; ++i) (i % 3 ? a : b).insert(i);
  const KllSketch m = KllSketch::merge(a, b);
  CHECK(m.items_seen() == 5000);
  CHECK(std::abs(quantile(m.to_slice(), 0.5) - 2500.0) <= 100.0);
  for (int h = 0; h < m.height(); ++h) CHECK(m.levels()[h].size() < m.capacity(h));
  CHECK_THROWS_AS(KllSketch::merge(a, KllSketch(32, RngStream(0, 0))), Error);
  const std::string bytes = m.serialize();
  CHECK(bytes.substr(0, 4) == "KLL1");
  std::size_t used = 0;
  const KllSketch back = KllSketch::deserialize(bytes, &used);
  CHECK(used == bytes.size());
  CHECK(back.serialize() == bytes);
  CHECK(back.levels() == m.levels());
  CHECK_THROWS_AS(KllSketch::deserialize("KLL0xxxxxxxxxxxxxxxxxxxxxxxx"), Error);
  CHECK_THROWS_AS(KllSketch::deserialize(bytes.substr(0, bytes.size() - 3)), Error);
  CHECK_THROWS_AS(KllSketch(1, RngStream(0, 0)), Error);
}
