#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "slicedot/slicedot.hpp"

using namespace slicedot;

namespace {
Measure blob(std::uint64_t seed, Index n, double shift, double scale = 1.0) {
  return gaussian_sample(n, Eigen::Vector2d::Constant(shift), Eigen::Vector2d::Constant(scale), seed);
}
}  // namespace

TEST_CASE("kernels: identity, range, Jensen ordering, gamma validation") {
  const DirectionSet ds = sample_uniform_sphere(2, 50, 1);
  const Measure a = blob(1, 15, 0), b = blob(2, 15, 1.5, 0.5);
  CHECK(sw_kernel(a, a, 0.7, ds) == 1.0);
  CHECK(usw_kernel(a, a, 0.7, ds) == 1.0);
  for (double gamma : {0.01, 0.5, 3.0}) {
    const double k = sw_kernel(a, b, gamma, ds), u = usw_kernel(a, b, gamma, ds);
    CHECK(k > 0);
    CHECK(k <= 1);
    CHECK(u <= 1);
    CHECK(u >= k - 1e-15);
    CHECK(k == sw_kernel(b, a, gamma, ds));
  }
  CHECK_THROWS_AS(sw_kernel(a, b, 0.0, ds), Error);
  CHECK_THROWS_AS(usw_kernel(a, b, -1.0, ds), Error);
}

TEST_CASE("gram: unit diagonal, PSD, permutation consistency") {
  const DirectionSet ds = sample_uniform_sphere(2, 40, 2);
  std::vector<Measure> ms;
  for (int k = 0; k < 6; ++k) ms.push_back(blob(10 + k, 8 + k, 0.3 * k, 0.5 + 0.2 * k));
  for (auto kind : {KernelKind::Sliced, KernelKind::UnbiasedSliced}) {
    const Eigen::MatrixXd G = gram(ms, kind, 0.8, ds);
    CHECK((G.diagonal().array() == 1.0).all());
    CHECK((G - G.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G).eigenvalues().minCoeff() >= -1e-8);

    const std::vector<int> perm{3, 0, 5, 1, 4, 2};
    std::vector<Measure> shuffled;
    for (int k : perm) shuffled.push_back(ms[static_cast<std::size_t>(k)]);
    const Eigen::MatrixXd H = gram(shuffled, kind, 0.8, ds);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) CHECK(H(i, j) == G(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]));
  }
}

TEST_CASE("embedding: zero at the reference, tracks SW, Dirac translate") {
  const Measure mu = blob(20, 400, 0), nu = blob(21, 400, 1.0, 1.5);
  const Measure ref = default_reference({mu, nu}, 400, 7);
  CHECK(ref.size() == 400);
  CHECK(ref.mass() == doctest::Approx(1.0));
  const DirectionSet ds = sample_uniform_sphere(2, 64, 3);

  CHECK(sw_embed(ref, ref, ds).values.cwiseAbs().maxCoeff() == 0.0);
  const auto em = sw_embed(mu, ref, ds), en = sw_embed(nu, ref, ds);
  CHECK(em.values.rows() == 64);
  CHECK(em.values.cols() == 400);
  const double sw = sw_mc(mu, nu, 2.0, ds).value;
  CHECK(std::abs(embedding_distance(em, en) - sw) <= 0.05 * sw);

  const Measure x = Measure::uniform(Eigen::RowVector3d(0, 0, 0)), y = Measure::uniform(Eigen::RowVector3d(1, 2, 2));
  const DirectionSet big = sample_uniform_sphere(3, 4000, 4);
  const double d2 = std::pow(embedding_distance(sw_embed(x, x, big), sw_embed(y, x, big)), 2);
  CHECK(d2 == doctest::Approx(3.0).epsilon(0.05));

  const DirectionSet other = sample_uniform_sphere(2, 64, 99);
  CHECK_THROWS_AS(embedding_distance(em, sw_embed(nu, ref, other)), Error);
  const Measure ref2 = default_reference({mu}, 100, 7);
  try {
    embedding_distance(em, sw_embed(nu, ref2, ds));
    FAIL("expected provenance mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ProvenanceMismatch);
  }
  CHECK_THROWS_AS(sw_embed(Measure(mu.points(), 2 * mu.weights()), ref, ds), Error);
}
