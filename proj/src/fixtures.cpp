#include "slicedot/fixtures.hpp"

#include "slicedot/rng.hpp"

namespace slicedot {

Measure gaussian_sample(Index n, const Eigen::VectorXd& mean, const Eigen::VectorXd& scale, std::uint64_t seed,
                        std::uint64_t stream) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "sample size must be >= 1");
  if (mean.size() != scale.size()) fail(ErrorCode::DimensionMismatch, "mean and scale differ in length");
  RngStream rng(seed, stream);
  Eigen::MatrixXd pts(n, mean.size());
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < mean.size(); ++k) pts(i, k) = mean(k) + scale(k) * rng.normal();
  return Measure::uniform(std::move(pts));
}

GaussianFixture gaussian_fixture(Index n, Index d, std::uint64_t seed) {
  Eigen::VectorXd scale(d);
  for (Index k = 0; k < d; ++k) scale(k) = k % 2 == 0 ? 1.0 : 2.0;
  return {gaussian_sample(n, Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d), seed, 1),
          gaussian_sample(n, Eigen::VectorXd::Ones(d), scale, seed, 2)};
}

}  // namespace slicedot
