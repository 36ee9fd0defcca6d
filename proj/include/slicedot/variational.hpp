#pragma once

#include <cstdint>
#include <vector>

#include "slicedot/measures.hpp"
#include "slicedot/slicers.hpp"

namespace slicedot {

/// Danskin gradient of the frozen-direction estimate of SW_p^p with respect
/// to the atoms of mu (rows). Linear slices; sign(0) = 0.
Eigen::MatrixXd grad_atoms(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& weights, const Measure& nu, double p,
                           const DirectionSet& ds);

/// Gradient of the frozen-direction SW_p^p estimate with respect to the
/// weights of mu: the mean of the f-potentials.
Eigen::VectorXd grad_weights(const Eigen::VectorXd& weights, const Eigen::MatrixXd& atoms, const Measure& nu, double p,
                             const DirectionSet& ds);

/// Mass-normalized descent direction grad_i / (p alpha_i); atoms with zero
/// weight do not move.
Eigen::MatrixXd particle_velocity(const Eigen::MatrixXd& grad, const Eigen::VectorXd& weights, double p);

struct Snapshot {
  int step = 0;
  Eigen::MatrixXd particles;
  double objective = 0;
};

struct FlowTrace {
  std::vector<Snapshot> snapshots;
  const Snapshot& last() const { return snapshots.back(); }
};

struct DescentOptions {
  double p = 2;
  int iters = 100;
  /// Step size; negative means the default 0.5 * d.
  double step = -1;
  Index projections = 50;
  std::uint64_t seed = 0;
  /// Record a snapshot every this many steps (the last step is always kept).
  int snapshot_every = 1;
  /// Directions used for recorded objectives; per-step directions otherwise.
  const DirectionSet* audit = nullptr;
};

struct FitResult {
  Measure model;
  std::vector<double> loss;
};

/// Minimum SW estimator over free atoms: SGD with fresh directions per step.
FitResult mswe_fit(const Measure& data, const Measure& init, const DescentOptions& opt);

enum class BarycenterMode { Plain, FairnessUnbiased };

struct BarycenterResult {
  Measure barycenter;
  /// (step, objective) at every snapshot.
  std::vector<std::pair<int, double>> trace;
};

/// Free-support SW barycenter with uniform weights, initialized from atoms
/// drawn uniformly from the union of the inputs.
BarycenterResult sw_barycenter(const std::vector<Measure>& measures, const std::vector<double>& weights,
                               Index n_atoms, BarycenterMode mode, const DescentOptions& opt);

/// Barycenter objective: sum_k w_k SW_p^p (Plain) or mean over slices of the
/// max over k (FairnessUnbiased), on fixed directions.
double barycenter_objective(const Measure& bary, const std::vector<Measure>& measures,
                            const std::vector<double>& weights, BarycenterMode mode, double p,
                            const DirectionSet& ds);

/// Explicit Euler particle flow of SW_p^p(., target) with uniform particles.
FlowTrace sw_gradient_flow(const Eigen::MatrixXd& particles, const Measure& target, const DescentOptions& opt);

/// Iterative distribution transfer along random orthogonal bases.
FlowTrace idt(const Eigen::MatrixXd& source, const Measure& target, int iters, std::uint64_t seed,
              const DirectionSet* audit = nullptr);

/// Discrete Knothe map by lexicographic sort; result[i] is the Y index of X_i.
std::vector<Index> knothe_discrete(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y);

}  // namespace slicedot
