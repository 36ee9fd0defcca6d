#include "slicedot/plans.hpp"

#include <algorithm>
#include <cmath>

namespace slicedot {

Eigen::MatrixXd PlanD::dense() const {
  Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(n, m);
  for (const auto& e : entries) pi(e.i, e.j) += e.mass;
  return pi;
}

PlanD PlanD::from_dense(const Eigen::MatrixXd& pi) {
  PlanD out;
  out.n = pi.rows();
  out.m = pi.cols();
  for (Index i = 0; i < pi.rows(); ++i)
    for (Index j = 0; j < pi.cols(); ++j)
      if (pi(i, j) > 0) out.entries.push_back({i, j, pi(i, j)});
  return out;
}

Eigen::VectorXd PlanD::row_sums() const {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
  for (const auto& e : entries) r(e.i) += e.mass;
  return r;
}

Eigen::VectorXd PlanD::col_sums() const {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
  for (const auto& e : entries) c(e.j) += e.mass;
  return c;
}

double ground_cost(const Eigen::Ref<const Eigen::RowVectorXd>& x, const Eigen::Ref<const Eigen::RowVectorXd>& y,
                   double p) {
  if (p == 2.0) return (x - y).squaredNorm();
  if (p == 1.0) return (x - y).cwiseAbs().sum();
  return (x - y).cwiseAbs().array().pow(p).sum();
}

double PlanD::cost(const Measure& mu, const Measure& nu, double p) const {
  double acc = 0;
  for (const auto& e : entries) acc += e.mass * ground_cost(mu.atom(e.i), nu.atom(e.j), p);
  return acc;
}

namespace {

struct Groups {
  Slice slice;                             // one atom per distinct value, group mass as weight
  std::vector<std::vector<Index>> members;  // original indices per group
};

Groups group_ties(const Slice& s) {
  Groups g;
  std::vector<double> values, weights;
  for (std::size_t k = 0; k < s.values.size(); ++k) {
    if (k == 0 || s.values[k] != s.values[k - 1]) {
      values.push_back(s.values[k]);
      weights.push_back(0);
      g.members.emplace_back();
    }
    weights.back() += s.weights[k];
    g.members.back().push_back(s.perm[k]);
  }
  g.slice = Slice::from_values(values, weights);
  return g;
}

}  // namespace

PlanD lift_plan(const Measure& mu, const Measure& nu, const Eigen::VectorXd& theta, const Projector& proj) {
  if (mu.dim() != nu.dim()) fail(ErrorCode::DimensionMismatch, "measures live in different dimensions");
  require_equal_mass(mu.mass(), nu.mass());
  const Groups ga = group_ties(project(mu, proj, theta));
  const Groups gb = group_ties(project(nu, proj, theta));
  const auto plan1d = northwest_corner(ga.slice, gb.slice);
  PlanD out;
  out.n = mu.size();
  out.m = nu.size();
  for (const auto& e : plan1d.entries) {
    const double wa = ga.slice.weights[static_cast<std::size_t>(e.i)];
    const double wb = gb.slice.weights[static_cast<std::size_t>(e.j)];
    for (Index i : ga.members[static_cast<std::size_t>(e.i)])
      for (Index j : gb.members[static_cast<std::size_t>(e.j)]) {
        const double mass = e.mass * (mu.weights()(i) / wa) * (nu.weights()(j) / wb);
        if (mass > 0) out.entries.push_back({i, j, mass});
      }
  }
  return out;
}

CostAndPlan swgg(const Measure& mu, const Measure& nu, const Eigen::VectorXd& theta, double p,
                 const Projector& proj) {
  detail::require_p(p);
  CostAndPlan out;
  out.plan = lift_plan(mu, nu, theta, proj);
  out.cost = out.plan.cost(mu, nu, p);
  return out;
}

namespace {

CostAndPlan weighted_average(const Measure& mu, const Measure& nu, const std::vector<CostAndPlan>& parts,
                             const std::vector<double>& w) {
  double wsum = 0;
  for (double v : w) wsum += v;
  Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(mu.size(), nu.size());
  double cost = 0;
  for (std::size_t l = 0; l < parts.size(); ++l) {
    if (w[l] == 0) continue;
    const double s = w[l] / wsum;
    cost += s * parts[l].cost;
    for (const auto& e : parts[l].plan.entries) pi(e.i, e.j) += s * e.mass;
  }
  return {cost, PlanD::from_dense(pi)};
}

std::vector<CostAndPlan> swgg_all(const Measure& mu, const Measure& nu, double p, const DirectionSet& ds,
                                  const Projector& proj) {
  std::vector<CostAndPlan> parts;
  parts.reserve(static_cast<std::size_t>(ds.size()));
  for (Index l = 0; l < ds.size(); ++l) parts.push_back(swgg(mu, nu, ds.theta(l), p, proj));
  return parts;
}

}  // namespace

CostAndPlan projected_wasserstein(const Measure& mu, const Measure& nu, double p, const DirectionSet& ds,
                                  const Projector& proj) {
  const auto parts = swgg_all(mu, nu, p, ds, proj);
  return weighted_average(mu, nu, parts, std::vector<double>(parts.size(), 1.0));
}

MinSwggResult min_swgg_search(const Measure& mu, const Measure& nu, double p, const DirectionSet& candidates,
                              const Projector& proj) {
  MinSwggResult best;
  for (Index l = 0; l < candidates.size(); ++l) {
    auto cp = swgg(mu, nu, candidates.theta(l), p, proj);
    if (l == 0 || cp.cost < best.cost) {
      best.theta = candidates.theta(l);
      best.index = l;
      best.cost = cp.cost;
      best.plan = std::move(cp.plan);
    }
  }
  return best;
}

CostAndPlan expected_sliced_transport(const Measure& mu, const Measure& nu, double p, double tau,
                                      const DirectionSet& ds, const Projector& proj) {
  if (!(tau >= 0) || !std::isfinite(tau)) fail(ErrorCode::InvalidArgument, "EST temperature must be >= 0");
  const auto parts = swgg_all(mu, nu, p, ds, proj);
  double lo = parts.front().cost;
  for (const auto& cp : parts) lo = std::min(lo, cp.cost);
  std::vector<double> w(parts.size());
  for (std::size_t l = 0; l < parts.size(); ++l) w[l] = tau == 0 ? 1.0 : std::exp(-tau * (parts[l].cost - lo));
  return weighted_average(mu, nu, parts, w);
}

}  // namespace slicedot
