#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slicedot/error.hpp"

namespace slicedot {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Weighted point set sum_i w_i delta_{x_i}. Atoms are the rows of `points`.
/// Immutable once built; every constructor validates.
template <typename Scalar>
class DiscreteMeasure {
 public:
  using Matrix = MatrixX<Scalar>;
  using Vector = VectorX<Scalar>;

  DiscreteMeasure(Matrix points, Vector weights)
      : points_(std::move(points)), weights_(std::move(weights)) {
    validate();
    mass_ = weights_.sum();
  }

  /// Uniform weights 1/n.
  static DiscreteMeasure uniform(Matrix points) {
    const Index n = points.rows();
    if (n == 0) fail(ErrorCode::EmptyInput, "measure needs at least one atom");
    Vector w = Vector::Constant(n, Scalar(1) / Scalar(n));
    return DiscreteMeasure(std::move(points), std::move(w));
  }

  const Matrix& points() const noexcept { return points_; }
  const Vector& weights() const noexcept { return weights_; }
  Scalar mass() const noexcept { return mass_; }
  Index size() const noexcept { return points_.rows(); }
  Index dim() const noexcept { return points_.cols(); }

  auto atom(Index i) const { return points_.row(i); }

  /// Weighted mean of the atoms divided by the mass.
  Vector mean() const { return (points_.transpose() * weights_) / mass_; }

  /// Centered second moment sum_i w_i |x_i - mean|^2 / mass.
  Scalar centered_second_moment() const {
    const Vector m = mean();
    Scalar acc = 0;
    for (Index i = 0; i < size(); ++i) acc += weights_(i) * (points_.row(i).transpose() - m).squaredNorm();
    return acc / mass_;
  }

  DiscreteMeasure normalized() const { return DiscreteMeasure(points_, weights_ / mass_); }

  DiscreteMeasure translated(const Vector& t) const {
    Matrix p = points_;
    p.rowwise() += t.transpose();
    return DiscreteMeasure(std::move(p), weights_);
  }

  DiscreteMeasure with_points(Matrix points) const { return DiscreteMeasure(std::move(points), weights_); }

 private:
  void validate() const {
    const Index n = points_.rows();
    if (n == 0) fail(ErrorCode::EmptyInput, "measure needs at least one atom");
    if (points_.cols() < 1) fail(ErrorCode::DimensionMismatch, "points must have dimension >= 1");
    if (weights_.size() != n)
      fail(ErrorCode::DimensionMismatch,
           "weight count " + std::to_string(weights_.size()) + " != atom count " + std::to_string(n));
    for (Index i = 0; i < n; ++i) {
      if (!std::isfinite(static_cast<double>(weights_(i))))
        fail(ErrorCode::NonFinite, "non-finite weight at atom " + std::to_string(i), static_cast<std::size_t>(i));
      if (weights_(i) < 0)
        fail(ErrorCode::NegativeWeight, "negative weight at atom " + std::to_string(i), static_cast<std::size_t>(i));
      if (!points_.row(i).allFinite())
        fail(ErrorCode::NonFinite, "non-finite coordinate at atom " + std::to_string(i), static_cast<std::size_t>(i));
    }
  }

  Matrix points_;
  Vector weights_;
  Scalar mass_ = 0;
};

using Measure = DiscreteMeasure<double>;

/// Builds a measure from ragged point lists; rejects rows of the wrong length
/// with the offending atom index. Omitted weights mean uniform 1/n.
template <typename Scalar = double>
DiscreteMeasure<Scalar> new_measure(const std::vector<std::vector<Scalar>>& points,
                                    const std::optional<std::vector<Scalar>>& weights = std::nullopt) {
  if (points.empty()) fail(ErrorCode::EmptyInput, "measure needs at least one atom");
  const std::size_t d = points.front().size();
  MatrixX<Scalar> m(static_cast<Index>(points.size()), static_cast<Index>(d));
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != d)
      fail(ErrorCode::DimensionMismatch,
           "atom " + std::to_string(i) + " has dimension " + std::to_string(points[i].size()) +
               ", expected " + std::to_string(d),
           i);
    for (std::size_t k = 0; k < d; ++k) m(static_cast<Index>(i), static_cast<Index>(k)) = points[i][k];
  }
  if (!weights) return DiscreteMeasure<Scalar>::uniform(std::move(m));
  VectorX<Scalar> w = Eigen::Map<const VectorX<Scalar>>(weights->data(), static_cast<Index>(weights->size()));
  return DiscreteMeasure<Scalar>(std::move(m), std::move(w));
}

/// Unit vector in the projector's parameter space.
template <typename Scalar>
class UnitDirection {
 public:
  using Vector = VectorX<Scalar>;

  explicit UnitDirection(Vector components) : v_(std::move(components)) {
    const Scalar norm = v_.norm();
    if (!(std::abs(norm - Scalar(1)) <= Scalar(1e-12)))
      fail(ErrorCode::InvalidArgument, "direction is not unit norm");
  }

  static UnitDirection normalized(const Vector& v) {
    const Scalar norm = v.norm();
    if (!(norm > 0) || !std::isfinite(static_cast<double>(norm)))
      fail(ErrorCode::DegenerateDirection, "cannot normalize a zero direction");
    Vector u = v / norm;
    // One Newton step on the norm keeps |u| within an ulp of 1.
    u /= u.norm();
    return UnitDirection(std::move(u));
  }

  static UnitDirection axis(Index d, Index k) {
    Vector v = Vector::Zero(d);
    v(k) = 1;
    return UnitDirection(std::move(v));
  }

  const Vector& components() const noexcept { return v_; }
  Index dim() const noexcept { return v_.size(); }

 private:
  Vector v_;
};

using Direction = UnitDirection<double>;

/// Mass equality check shared by the balanced solvers.
template <typename Scalar>
inline void require_equal_mass(Scalar a, Scalar b, Scalar tol = Scalar(1e-9)) {
  if (std::abs(a - b) > tol * std::max(Scalar(1), std::max(std::abs(a), std::abs(b))))
    fail(ErrorCode::MassMismatch, "mass mismatch: " + std::to_string(static_cast<double>(a)) + " vs " +
                                      std::to_string(static_cast<double>(b)));
}

}  // namespace slicedot
