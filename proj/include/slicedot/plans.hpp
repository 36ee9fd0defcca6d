#pragma once

#include <vector>

#include "slicedot/measures.hpp"
#include "slicedot/one_d.hpp"
#include "slicedot/slicers.hpp"

namespace slicedot {

/// Sparse plan between the atoms of two d-dimensional measures, in original
/// indexing.
struct PlanD {
  std::vector<PlanEntry<double>> entries;
  Index n = 0;
  Index m = 0;

  Eigen::MatrixXd dense() const;
  static PlanD from_dense(const Eigen::MatrixXd& pi);
  Eigen::VectorXd row_sums() const;
  Eigen::VectorXd col_sums() const;
  /// sum pi_ij |x_i - y_j|_p^p.
  double cost(const Measure& mu, const Measure& nu, double p) const;
};

/// |x - y|_p^p.
double ground_cost(const Eigen::Ref<const Eigen::RowVectorXd>& x, const Eigen::Ref<const Eigen::RowVectorXd>& y,
                   double p);

/// 1D optimal plan along theta lifted to the original atoms; mass between two
/// tie groups is split proportionally to alpha_i beta_j.
PlanD lift_plan(const Measure& mu, const Measure& nu, const Eigen::VectorXd& theta,
                const Projector& proj = Projector::linear());

struct CostAndPlan {
  double cost = 0;
  PlanD plan;
};

CostAndPlan swgg(const Measure& mu, const Measure& nu, const Eigen::VectorXd& theta, double p,
                 const Projector& proj = Projector::linear());

/// Mean SWGG cost over directions with the direction-averaged plan.
CostAndPlan projected_wasserstein(const Measure& mu, const Measure& nu, double p, const DirectionSet& ds,
                                  const Projector& proj = Projector::linear());

struct MinSwggResult {
  Eigen::VectorXd theta;
  Index index = 0;
  double cost = 0;
  PlanD plan;
};

/// Best candidate direction for SWGG; ties go to the lowest index.
MinSwggResult min_swgg_search(const Measure& mu, const Measure& nu, double p, const DirectionSet& candidates,
                              const Projector& proj = Projector::linear());

/// SWGG costs and plans averaged with weights exp(-tau * cost_l).
CostAndPlan expected_sliced_transport(const Measure& mu, const Measure& nu, double p, double tau,
                                      const DirectionSet& ds, const Projector& proj = Projector::linear());

}  // namespace slicedot
