#pragma once

#include <cstdint>
#include <vector>

#include "slicedot/measures.hpp"
#include "slicedot/slicers.hpp"

namespace slicedot {

enum class KernelKind { Sliced, UnbiasedSliced };

/// exp(-gamma * SW_2^2) on shared directions.
double sw_kernel(const Measure& mu, const Measure& nu, double gamma, const DirectionSet& ds);
/// Mean over slices of exp(-gamma * W_2^2).
double usw_kernel(const Measure& mu, const Measure& nu, double gamma, const DirectionSet& ds);

Eigen::MatrixXd gram(const std::vector<Measure>& measures, KernelKind kind, double gamma, const DirectionSet& ds);

/// L x n matrix of displacements T(<theta_l, y_j>) - <theta_l, y_j> against a
/// reference measure, with the provenance needed to compare embeddings.
struct EmbeddingMatrix {
  Eigen::MatrixXd values;
  std::uint64_t ds_hash = 0;
  std::uint64_t reference_hash = 0;
};

EmbeddingMatrix sw_embed(const Measure& mu, const Measure& reference, const DirectionSet& ds);

/// |E(mu) - E(nu)| / sqrt(L n); rejects embeddings built on different
/// directions or references.
double embedding_distance(const EmbeddingMatrix& a, const EmbeddingMatrix& b);

/// Uniform measure on the pooled atoms, deterministically subsampled to at
/// most n atoms; the mass matches the inputs.
Measure default_reference(const std::vector<Measure>& measures, Index n, std::uint64_t seed);

}  // namespace slicedot
