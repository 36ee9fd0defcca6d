#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "slicedot/measures.hpp"
#include "slicedot/one_d.hpp"
#include "slicedot/rng.hpp"

namespace slicedot {

/// Defining function g(x, theta) of a generalized Radon transform.
/// Linear: <theta, x>. Circular: |x - r theta|. OddPolynomial:
/// sum_k theta_k x^{alpha_k} over the stored multi-indices.
class Projector {
 public:
  enum class Kind { Linear, Circular, OddPolynomial };

  static Projector linear() { return Projector(Kind::Linear); }
  static Projector circular(double r);
  static Projector odd_polynomial(int degree, std::vector<std::vector<int>> multi_indices);
  /// All multi-indices of total degree `degree` in dimension d.
  static Projector full_odd_polynomial(Index d, int degree);

  Kind kind() const noexcept { return kind_; }
  double radius() const noexcept { return r_; }
  int degree() const noexcept { return degree_; }
  const std::vector<std::vector<int>>& multi_indices() const noexcept { return alphas_; }
  bool is_linear() const noexcept { return kind_ == Kind::Linear; }

  /// Dimension of the parameter space Omega for data in dimension d.
  Index parameter_dim(Index d) const;
  double eval(const Eigen::VectorXd& theta, const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  Eigen::VectorXd project_all(const Eigen::MatrixXd& points, const Eigen::VectorXd& theta) const;
  std::string describe() const;

 private:
  explicit Projector(Kind k) : kind_(k) {}
  void check_dim(Index d, Index theta_dim) const;

  Kind kind_;
  double r_ = 1.0;
  int degree_ = 1;
  std::vector<std::vector<int>> alphas_;
};

namespace provenance {
struct Mc {
  std::uint64_t seed;
};
struct QmcMapped {
  std::uint64_t sequence_id;
};
struct SpiralS2 {};
struct RotatedQmc {
  std::uint64_t seed;
};
struct Custom {};
}  // namespace provenance

using Provenance = std::variant<provenance::Mc, provenance::QmcMapped, provenance::SpiralS2,
                                provenance::RotatedQmc, provenance::Custom>;

/// L unit directions (rows) with the generator that produced them and one RNG
/// substream id per direction.
class DirectionSet {
 public:
  DirectionSet(Eigen::MatrixXd directions, Provenance prov, std::vector<std::uint64_t> stream_ids = {});

  Index size() const noexcept { return dirs_.rows(); }
  Index dim() const noexcept { return dirs_.cols(); }
  const Eigen::MatrixXd& directions() const noexcept { return dirs_; }
  Eigen::VectorXd theta(Index l) const { return dirs_.row(l).transpose(); }
  Direction direction(Index l) const { return Direction(theta(l)); }
  const Provenance& provenance() const noexcept { return prov_; }
  const std::vector<std::uint64_t>& stream_ids() const noexcept { return streams_; }
  std::string provenance_string() const;

  /// Digest of provenance, shape and the exact direction bits.
  std::uint64_t hash() const;

 private:
  Eigen::MatrixXd dirs_;
  Provenance prov_;
  std::vector<std::uint64_t> streams_;
};

/// theta = z / |z|, z ~ N(0, I); direction l draws from substream (seed, l).
DirectionSet sample_uniform_sphere(Index d, Index L, std::uint64_t seed);

/// Standard normal quantile.
double normal_quantile(double u);

/// Phi^{-1}(x) / |Phi^{-1}(x)|; throws DegenerateDirection at the cube center.
Eigen::VectorXd qmc_point_to_direction(const Eigen::VectorXd& x);

/// Halton points in [0,1]^d (first d primes, indices from 1 + sequence_id * L).
Eigen::MatrixXd halton(Index d, Index L, std::uint64_t sequence_id = 0);

/// Halton points mapped to the sphere through the normal quantile.
DirectionSet qmc_mapped(Index d, Index L, std::uint64_t sequence_id = 0);

/// Generalized spiral on S^2.
DirectionSet spiral_s2(Index L);

/// Uniform random orthogonal matrix (QR of a Gaussian matrix with diag(R) > 0).
Eigen::MatrixXd random_orthogonal(Index d, RngStream& rng);

/// Applies one uniform random rotation to every direction.
DirectionSet random_rotation(const DirectionSet& ds, std::uint64_t seed);

/// g_theta push-forward of m as a sorted slice.
Slice project(const Measure& m, const Projector& proj, const Eigen::VectorXd& theta);

inline Slice project(const Measure& m, const Projector& proj, const Direction& theta) {
  return project(m, proj, theta.components());
}

}  // namespace slicedot
