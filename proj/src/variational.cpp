#include "slicedot/variational.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "slicedot/sw.hpp"

namespace slicedot {

namespace {

double sign(double v) { return (v > 0) - (v < 0); }

void check_grad_inputs(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& weights, const Measure& nu,
                       const DirectionSet& ds) {
  if (atoms.rows() != weights.size()) fail(ErrorCode::DimensionMismatch, "one weight per atom required");
  if (atoms.cols() != nu.dim() || ds.dim() != nu.dim())
    fail(ErrorCode::DimensionMismatch, "atoms, target and directions must share dimension");
  require_equal_mass(weights.sum(), nu.mass());
}

DirectionSet step_directions(Index d, Index L, std::uint64_t seed, int step) {
  return sample_uniform_sphere(d, L, mix64(seed ^ (0xa5a5a5a5ull + static_cast<std::uint64_t>(step))));
}

double resolve_step(const DescentOptions& opt, Index d) {
  const double eta = opt.step < 0 ? 0.5 * static_cast<double>(d) : opt.step;
  if (!(eta > 0) || !std::isfinite(eta)) fail(ErrorCode::InvalidArgument, "step size must be > 0");
  return eta;
}

void check_options(const DescentOptions& opt) {
  if (opt.iters < 0) fail(ErrorCode::InvalidArgument, "iteration count must be >= 0");
  if (opt.projections < 1) fail(ErrorCode::InvalidArgument, "projections must be >= 1");
  if (opt.snapshot_every < 1) fail(ErrorCode::InvalidArgument, "snapshot interval must be >= 1");
  if (!(opt.p > 1)) fail(ErrorCode::InvalidArgument, "gradient solvers need p > 1");
}

void check_finite(const Eigen::MatrixXd& x) {
  if (!x.allFinite()) fail(ErrorCode::Numerical, "non-finite values during descent");
}

}  // namespace

Eigen::MatrixXd grad_atoms(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& weights, const Measure& nu, double p,
                           const DirectionSet& ds) {
  if (!(p > 1)) fail(ErrorCode::InvalidArgument, "grad_atoms needs p > 1");
  check_grad_inputs(atoms, weights, nu, ds);
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(atoms.rows(), atoms.cols());
  for (Index l = 0; l < ds.size(); ++l) {
    const Eigen::VectorXd th = ds.theta(l);
    const Eigen::VectorXd px = atoms * th, py = nu.points() * th;
    const Slice a = Slice::from_unsorted(px, weights), b = Slice::from_unsorted(py, nu.weights());
    const auto plan = northwest_corner(a, b);
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(atoms.rows());
    for (const auto& e : plan.entries) {
      const double diff = a.values[static_cast<std::size_t>(e.i)] - b.values[static_cast<std::size_t>(e.j)];
      const double mag = p == 2.0 ? std::abs(diff) : std::pow(std::abs(diff), p - 1);
      coef(a.perm[static_cast<std::size_t>(e.i)]) += p * e.mass * mag * sign(diff);
    }
    grad += coef * th.transpose();
  }
  return grad / static_cast<double>(ds.size());
}

Eigen::VectorXd grad_weights(const Eigen::VectorXd& weights, const Eigen::MatrixXd& atoms, const Measure& nu, double p,
                             const DirectionSet& ds) {
  detail::require_p(p);
  check_grad_inputs(atoms, weights, nu, ds);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(weights.size());
  const PowerCost<double> cost{p};
  for (Index l = 0; l < ds.size(); ++l) {
    const Eigen::VectorXd th = ds.theta(l);
    const Slice a = Slice::from_unsorted(atoms * th, weights);
    const Slice b = Slice::from_unsorted(nu.points() * th, nu.weights());
    // Where cumulative weights coincide the dual is not unique; averaging the
    // two extreme choices gives the central derivative.
    const auto lo = northwest_corner_with_potentials(a, b, cost, NwTie::AdvanceRow);
    const auto hi = northwest_corner_with_potentials(a, b, cost, NwTie::AdvanceColumn);
    for (std::size_t k = 0; k < a.perm.size(); ++k)
      g(a.perm[k]) += 0.5 * (lo.potentials.f[k] + hi.potentials.f[k]);
  }
  return g / static_cast<double>(ds.size());
}

Eigen::MatrixXd particle_velocity(const Eigen::MatrixXd& grad, const Eigen::VectorXd& weights, double p) {
  Eigen::MatrixXd v = grad;
  for (Index i = 0; i < v.rows(); ++i) {
    if (weights(i) > 0)
      v.row(i) /= p * weights(i);
    else
      v.row(i).setZero();
  }
  return v;
}

FitResult mswe_fit(const Measure& data, const Measure& init, const DescentOptions& opt) {
  check_options(opt);
  if (init.dim() != data.dim()) fail(ErrorCode::DimensionMismatch, "model and data dimensions differ");
  const double eta = resolve_step(opt, data.dim());
  Eigen::MatrixXd X = init.points();
  const Eigen::VectorXd& w = init.weights();
  std::vector<double> loss;
  loss.reserve(static_cast<std::size_t>(opt.iters));
  for (int t = 0; t < opt.iters; ++t) {
    const DirectionSet ds = step_directions(data.dim(), opt.projections, opt.seed, t);
    const Measure model(X, w);
    loss.push_back(sw_mc(model, data, opt.p, opt.audit ? *opt.audit : ds).value_p);
    X -= eta * particle_velocity(grad_atoms(X, w, data, opt.p, ds), w, opt.p);
    check_finite(X);
  }
  return {Measure(std::move(X), w), std::move(loss)};
}

double barycenter_objective(const Measure& bary, const std::vector<Measure>& measures,
                            const std::vector<double>& weights, BarycenterMode mode, double p,
                            const DirectionSet& ds) {
  const std::size_t K = measures.size();
  std::vector<std::vector<double>> costs(K);
  for (std::size_t k = 0; k < K; ++k) costs[k] = slice_costs(bary, measures[k], p, ds);
  double acc = 0;
  for (Index l = 0; l < ds.size(); ++l) {
    const auto li = static_cast<std::size_t>(l);
    if (mode == BarycenterMode::Plain) {
      for (std::size_t k = 0; k < K; ++k) acc += weights[k] * costs[k][li];
    } else {
      double top = costs[0][li];
      for (std::size_t k = 1; k < K; ++k) top = std::max(top, costs[k][li]);
      acc += top;
    }
  }
  return acc / static_cast<double>(ds.size());
}

BarycenterResult sw_barycenter(const std::vector<Measure>& measures, const std::vector<double>& weights,
                               Index n_atoms, BarycenterMode mode, const DescentOptions& opt) {
  if (measures.empty()) fail(ErrorCode::EmptyInput, "barycenter needs at least one measure");
  if (weights.size() != measures.size()) fail(ErrorCode::DimensionMismatch, "one weight per measure required");
  if (n_atoms < 1) fail(ErrorCode::InvalidArgument, "barycenter needs at least one atom");
  check_options(opt);
  double wsum = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!(weights[k] > 0)) fail(ErrorCode::InvalidArgument, "barycenter weights must be > 0", k);
    wsum += weights[k];
  }
  if (std::abs(wsum - 1) > 1e-9) fail(ErrorCode::InvalidArgument, "barycenter weights must sum to 1");
  const Index d = measures.front().dim();
  Index pooled = 0;
  for (std::size_t k = 0; k < measures.size(); ++k) {
    if (measures[k].dim() != d) fail(ErrorCode::DimensionMismatch, "marginals differ in dimension", k);
    require_equal_mass(measures[k].mass(), measures.front().mass());
    pooled += measures[k].size();
  }
  const double eta = resolve_step(opt, d);

  RngStream init_rng(opt.seed, 0x62617279ull);
  Eigen::MatrixXd X(n_atoms, d);
  for (Index i = 0; i < n_atoms; ++i) {
    auto pick = static_cast<Index>(init_rng.uniform() * static_cast<double>(pooled));
    pick = std::min(pick, pooled - 1);
    for (const auto& m : measures) {
      if (pick < m.size()) {
        X.row(i) = m.atom(pick);
        break;
      }
      pick -= m.size();
    }
  }
  const Eigen::VectorXd w =
      Eigen::VectorXd::Constant(n_atoms, measures.front().mass() / static_cast<double>(n_atoms));

  BarycenterResult out{Measure(X, w), {}};
  const auto record = [&](int t, const DirectionSet& ds) {
    out.trace.emplace_back(t, barycenter_objective(Measure(X, w), measures, weights, mode, opt.p,
                                                   opt.audit ? *opt.audit : ds));
  };
  Eigen::MatrixXd tail = Eigen::MatrixXd::Zero(n_atoms, d);
  int tail_count = 0;
  for (int t = 0; t < opt.iters; ++t) {
    const DirectionSet ds = step_directions(d, opt.projections, opt.seed, t);
    if (t % opt.snapshot_every == 0) record(t, ds);
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(n_atoms, d);
    if (mode == BarycenterMode::Plain) {
      for (std::size_t k = 0; k < measures.size(); ++k) grad += weights[k] * grad_atoms(X, w, measures[k], opt.p, ds);
    } else {
      // Per direction, only the farthest marginal contributes.
      for (Index l = 0; l < ds.size(); ++l) {
        const DirectionSet one(ds.directions().row(l), provenance::Custom{});
        std::size_t arg = 0;
        double top = -1;
        for (std::size_t k = 0; k < measures.size(); ++k) {
          const double c = slice_costs(Measure(X, w), measures[k], opt.p, one)[0];
          if (c > top) {
            top = c;
            arg = k;
          }
        }
        grad += grad_atoms(X, w, measures[arg], opt.p, one);
      }
      grad /= static_cast<double>(ds.size());
    }
    // Robbins-Monro decay, then average the second half of the run.
    const double eta_t = eta / std::sqrt(1.0 + t / 10.0);
    X -= eta_t * particle_velocity(grad, w, opt.p);
    check_finite(X);
    if (2 * t >= opt.iters) {
      tail += X;
      ++tail_count;
    }
  }
  if (tail_count > 0) X = tail / static_cast<double>(tail_count);
  record(opt.iters, step_directions(d, opt.projections, opt.seed, opt.iters));
  out.barycenter = Measure(std::move(X), w);
  return out;
}

FlowTrace sw_gradient_flow(const Eigen::MatrixXd& particles, const Measure& target, const DescentOptions& opt) {
  check_options(opt);
  if (particles.rows() < 1) fail(ErrorCode::EmptyInput, "flow needs at least one particle");
  if (particles.cols() != target.dim()) fail(ErrorCode::DimensionMismatch, "particles and target dimensions differ");
  const Index d = target.dim();
  const double eta = resolve_step(opt, d);
  const Eigen::VectorXd w =
      Eigen::VectorXd::Constant(particles.rows(), target.mass() / static_cast<double>(particles.rows()));
  Eigen::MatrixXd X = particles;
  FlowTrace trace;
  const auto record = [&](int t, const DirectionSet& ds) {
    trace.snapshots.push_back({t, X, sw_mc(Measure(X, w), target, opt.p, opt.audit ? *opt.audit : ds).value_p});
  };
  for (int t = 0; t < opt.iters; ++t) {
    const DirectionSet ds = step_directions(d, opt.projections, opt.seed, t);
    if (t % opt.snapshot_every == 0) record(t, ds);
    X -= eta * particle_velocity(grad_atoms(X, w, target, opt.p, ds), w, opt.p);
    check_finite(X);
  }
  record(opt.iters, step_directions(d, opt.projections, opt.seed, opt.iters));
  return trace;
}

FlowTrace idt(const Eigen::MatrixXd& source, const Measure& target, int iters, std::uint64_t seed,
              const DirectionSet* audit) {
  const Index n = source.rows(), d = source.cols();
  if (n != target.size()) fail(ErrorCode::DimensionMismatch, "IDT needs equal point counts");
  if (d != target.dim()) fail(ErrorCode::DimensionMismatch, "source and target dimensions differ");
  if (iters < 0) fail(ErrorCode::InvalidArgument, "iteration count must be >= 0");
  const double w0 = target.weights()(0);
  for (Index j = 0; j < n; ++j)
    if (std::abs(target.weights()(j) - w0) > 1e-12 * std::max(1.0, w0))
      fail(ErrorCode::InvalidArgument, "IDT needs uniform target weights", static_cast<std::size_t>(j));
  const Eigen::VectorXd w = target.weights();
  Eigen::MatrixXd X = source;
  FlowTrace trace;
  const auto objective = [&](const DirectionSet& ds) { return sw_mc(Measure(X, w), target, 2.0, ds).value_p; };
  for (int t = 0; t <= iters; ++t) {
    RngStream rng(seed, static_cast<std::uint64_t>(t));
    const Eigen::MatrixXd basis = random_orthogonal(d, rng);
    const DirectionSet bds(basis.transpose(), provenance::Custom{});
    trace.snapshots.push_back({t, X, objective(audit ? *audit : bds)});
    if (t == iters) break;
    Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(n, d);
    for (Index k = 0; k < d; ++k) {
      const Eigen::VectorXd th = basis.col(k);
      const Slice a = Slice::from_unsorted(X * th, w);
      const Slice b = Slice::from_unsorted(target.points() * th, w);
      for (std::size_t r = 0; r < a.perm.size(); ++r)
        delta.row(a.perm[r]) += (b.values[r] - a.values[r]) * th.transpose();
    }
    X += delta;
    check_finite(X);
  }
  return trace;
}

std::vector<Index> knothe_discrete(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
  if (X.rows() != Y.rows()) fail(ErrorCode::DimensionMismatch, "Knothe map needs equal point counts");
  if (X.cols() != Y.cols()) fail(ErrorCode::DimensionMismatch, "Knothe map needs equal dimensions");
  const auto lex_order = [](const Eigen::MatrixXd& P) {
    std::vector<Index> idx(static_cast<std::size_t>(P.rows()));
    std::iota(idx.begin(), idx.end(), Index(0));
    std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
      for (Index k = 0; k < P.cols(); ++k) {
        if (P(a, k) < P(b, k)) return true;
        if (P(b, k) < P(a, k)) return false;
      }
      return false;
    });
    return idx;
  };
  const auto ox = lex_order(X), oy = lex_order(Y);
  std::vector<Index> sigma(ox.size());
  for (std::size_t r = 0; r < ox.size(); ++r) sigma[static_cast<std::size_t>(ox[r])] = oy[r];
  return sigma;
}

}  // namespace slicedot
