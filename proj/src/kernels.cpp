#include "slicedot/kernels.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "slicedot/sw.hpp"

namespace slicedot {

namespace {

void check_gamma(double gamma) {
  if (!(gamma > 0) || !std::isfinite(gamma)) fail(ErrorCode::InvalidArgument, "kernel bandwidth gamma must be > 0");
}

std::uint64_t hash_measure(const Measure& m) {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(m.size()) * 31 + static_cast<std::uint64_t>(m.dim()));
  for (Index i = 0; i < m.size(); ++i) {
    for (Index k = 0; k < m.dim(); ++k) h = mix64(h ^ std::bit_cast<std::uint64_t>(m.points()(i, k)));
    h = mix64(h ^ std::bit_cast<std::uint64_t>(m.weights()(i)));
  }
  return h;
}

double kernel_from_costs(const std::vector<double>& costs, KernelKind kind, double gamma) {
  const double L = static_cast<double>(costs.size());
  if (kind == KernelKind::Sliced) return std::exp(-gamma * std::accumulate(costs.begin(), costs.end(), 0.0) / L);
  double acc = 0;
  for (double c : costs) acc += std::exp(-gamma * c);
  return acc / L;
}

}  // namespace

double sw_kernel(const Measure& mu, const Measure& nu, double gamma, const DirectionSet& ds) {
  check_gamma(gamma);
  return kernel_from_costs(slice_costs(mu, nu, 2.0, ds), KernelKind::Sliced, gamma);
}

double usw_kernel(const Measure& mu, const Measure& nu, double gamma, const DirectionSet& ds) {
  check_gamma(gamma);
  return kernel_from_costs(slice_costs(mu, nu, 2.0, ds), KernelKind::UnbiasedSliced, gamma);
}

Eigen::MatrixXd gram(const std::vector<Measure>& measures, KernelKind kind, double gamma, const DirectionSet& ds) {
  check_gamma(gamma);
  const auto N = static_cast<Index>(measures.size());
  Eigen::MatrixXd K = Eigen::MatrixXd::Identity(N, N);
  for (Index r = 0; r < N; ++r)
    for (Index c = r + 1; c < N; ++c) {
      const double v = kernel_from_costs(
          slice_costs(measures[static_cast<std::size_t>(r)], measures[static_cast<std::size_t>(c)], 2.0, ds), kind,
          gamma);
      K(r, c) = K(c, r) = v;
    }
  return K;
}

EmbeddingMatrix sw_embed(const Measure& mu, const Measure& reference, const DirectionSet& ds) {
  if (mu.dim() != reference.dim() || ds.dim() != mu.dim())
    fail(ErrorCode::DimensionMismatch, "measure, reference and directions must share dimension");
  require_equal_mass(mu.mass(), reference.mass());
  const double w0 = reference.weights()(0);
  for (Index j = 0; j < reference.size(); ++j)
    if (std::abs(reference.weights()(j) - w0) > 1e-12 * std::max(1.0, w0))
      fail(ErrorCode::InvalidArgument, "reference measure must have uniform weights", static_cast<std::size_t>(j));
  EmbeddingMatrix E;
  E.values.resize(ds.size(), reference.size());
  E.ds_hash = ds.hash();
  E.reference_hash = hash_measure(reference);
  for (Index l = 0; l < ds.size(); ++l) {
    const Eigen::VectorXd th = ds.theta(l);
    const Slice s_ref = Slice::from_unsorted(reference.points() * th, reference.weights());
    const Slice s_mu = Slice::from_unsorted(mu.points() * th, mu.weights());
    for (std::size_t k = 0; k < s_ref.values.size(); ++k) {
      const double y = s_ref.values[k];
      E.values(l, s_ref.perm[k]) = monotone_map(s_ref, s_mu, y) - y;
    }
  }
  return E;
}

double embedding_distance(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
  if (a.ds_hash != b.ds_hash || a.reference_hash != b.reference_hash)
    fail(ErrorCode::ProvenanceMismatch, "embeddings use different directions or references");
  if (a.values.rows() != b.values.rows() || a.values.cols() != b.values.cols())
    fail(ErrorCode::DimensionMismatch, "embedding shapes differ");
  return (a.values - b.values).norm() / std::sqrt(static_cast<double>(a.values.size()));
}

Measure default_reference(const std::vector<Measure>& measures, Index n, std::uint64_t seed) {
  if (measures.empty()) fail(ErrorCode::EmptyInput, "reference needs at least one measure");
  if (n < 1) fail(ErrorCode::InvalidArgument, "reference needs at least one atom");
  const Index d = measures.front().dim();
  Index pooled = 0;
  for (const auto& m : measures) {
    if (m.dim() != d) fail(ErrorCode::DimensionMismatch, "measures differ in dimension");
    pooled += m.size();
  }
  Eigen::MatrixXd all(pooled, d);
  Index r = 0;
  for (const auto& m : measures) {
    all.middleRows(r, m.size()) = m.points();
    r += m.size();
  }
  std::vector<Index> idx(static_cast<std::size_t>(pooled));
  std::iota(idx.begin(), idx.end(), Index(0));
  if (pooled > n) {
    // Partial Fisher-Yates on the seed's stream, then original order.
    RngStream rng(seed, 0x726566ull);
    for (Index k = 0; k < n; ++k) {
      const auto span = static_cast<double>(pooled - k);
      Index pick = k + std::min(static_cast<Index>(rng.uniform() * span), pooled - k - 1);
      std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(pick)]);
    }
    idx.resize(static_cast<std::size_t>(n));
    std::sort(idx.begin(), idx.end());
  }
  Eigen::MatrixXd pts(static_cast<Index>(idx.size()), d);
  for (std::size_t k = 0; k < idx.size(); ++k) pts.row(static_cast<Index>(k)) = all.row(idx[k]);
  const auto cnt = static_cast<double>(idx.size());
  return Measure(std::move(pts), Eigen::VectorXd::Constant(static_cast<Index>(idx.size()),
                                                           measures.front().mass() / cnt));
}

}  // namespace slicedot
