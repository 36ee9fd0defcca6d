#pragma once

#include <cstdint>

#include "slicedot/measures.hpp"

namespace slicedot {

/// n samples of N(mean, diag(scale^2)) from substream (seed, stream).
Measure gaussian_sample(Index n, const Eigen::VectorXd& mean, const Eigen::VectorXd& scale, std::uint64_t seed,
                        std::uint64_t stream = 0);

struct GaussianFixture {
  Measure mu;
  Measure nu;
};

/// Seeded pair mu ~ N(0, I), nu ~ N((1, ..., 1), diag(1, 2, 1, 2, ...)^2),
/// n uniform atoms each, used by estimator benchmarks.
GaussianFixture gaussian_fixture(Index n, Index d, std::uint64_t seed);

}  // namespace slicedot
