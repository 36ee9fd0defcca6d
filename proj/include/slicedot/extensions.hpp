#pragma once

#include <utility>
#include <vector>

#include "slicedot/measures.hpp"
#include "slicedot/one_d.hpp"
#include "slicedot/slicers.hpp"

namespace slicedot {

/// Barycentric multi-marginal cost of one slice, integrating the step
/// quantile functions exactly over the merged breakpoints.
double smw_slice_direct(const std::vector<Slice>& slices, const std::vector<double>& betas);
/// Same quantity through 1/2 sum_k sum_k' beta_k beta_k' W_2^2.
double smw_slice_pairwise(const std::vector<Slice>& slices, const std::vector<double>& betas);

/// Sliced multi-marginal discrepancy (squared, p = 2) averaged over ds.
double smw(const std::vector<Measure>& measures, const std::vector<double>& betas, const DirectionSet& ds,
           const Projector& proj = Projector::linear());

struct PartialAssignment {
  std::vector<std::pair<Index, Index>> pairs;  ///< sorted-index pairs
  double transported_mass = 0;
  double cost = 0;
};

/// Partial transport of mass s between uniform slices with equal atom weight
/// w under |x - y|, by incremental active-set growth over neighboring
/// candidate pairs.
PartialAssignment pot_1d(const Slice& a, const Slice& b, double s);

/// Injective assignment of n sorted reals into m >= n sorted reals minimizing
/// sum (x_i - y_sigma(i))^2, by a left-to-right conflict-resolution scan.
PartialAssignment opot_1d_assign(const std::vector<double>& X, const std::vector<double>& Y);

enum class PartialMode { Limited, OneSided };

/// Mean over slices of pot_1d (Limited, s = s_fraction * min mass) or
/// opot_1d_assign (OneSided) costs.
double sliced_partial(const Measure& mu, const Measure& nu, double s_fraction, const DirectionSet& ds,
                      PartialMode mode, const Projector& proj = Projector::linear());

struct UotResult {
  double dual_value = 0;
  std::vector<double> f;  ///< sorted-index space of a
  std::vector<double> g;  ///< sorted-index space of b
  int iterations = 0;
  std::vector<double> trajectory;
};

/// 1D unbalanced OT with rho_1 KL and rho_2 KL marginal penalties, by
/// Frank-Wolfe on the translation-invariant dual; cost |x - y|^p.
UotResult uot_1d_fw(const Slice& a, const Slice& b, double rho1, double rho2, double p, int iters);

/// phi°(x) = rho (1 - exp(-x / rho)).
double kl_conjugate(double x, double rho);

double suot(const Measure& mu, const Measure& nu, double rho1, double rho2, const DirectionSet& ds, int iters,
            double p = 2, const Projector& proj = Projector::linear());

/// Gromov cost sum |(x_i - x_i')^2 - (y_j - y_j')^2|^2 / n^2 of the better of
/// the ascending-ascending and ascending-descending matchings.
double gw_sorted_slice(const std::vector<double>& x_sorted, const std::vector<double>& y_sorted);

/// Sliced Gromov-Wasserstein heuristic; the lower-dimensional input is
/// zero-padded to the dimension of ds.
double sgw_heuristic(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, const DirectionSet& ds);

}  // namespace slicedot
