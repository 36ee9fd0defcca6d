#include "slicedot/sw.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace slicedot {

namespace {

void check_pair(const Measure& mu, const Measure& nu, const DirectionSet& ds, const Projector& proj) {
  if (mu.dim() != nu.dim()) fail(ErrorCode::DimensionMismatch, "measures live in different dimensions");
  if (ds.dim() != proj.parameter_dim(mu.dim()))
    fail(ErrorCode::DimensionMismatch, "direction set dimension does not match the projector");
  require_equal_mass(mu.mass(), nu.mass());
}

double sign(double v) { return (v > 0) - (v < 0); }

}  // namespace

SwEstimate make_estimate(std::vector<double> per_slice, double p) {
  SwEstimate est;
  const double L = static_cast<double>(per_slice.size());
  double mean = 0;
  for (double v : per_slice) mean += v;
  mean /= L;
  est.value_p = std::max(0.0, mean);
  est.value = std::pow(est.value_p, 1.0 / p);
  if (per_slice.size() > 1) {
    double ss = 0;
    for (double v : per_slice) ss += (v - mean) * (v - mean);
    est.std_error = std::sqrt(ss / (L - 1) / L);
  }
  est.per_slice = std::move(per_slice);
  return est;
}

std::vector<double> slice_costs(const Measure& mu, const Measure& nu, double p, const DirectionSet& ds,
                                const Projector& proj) {
  detail::require_p(p);
  check_pair(mu, nu, ds, proj);
  std::vector<double> out(static_cast<std::size_t>(ds.size()));
  for (Index l = 0; l < ds.size(); ++l) {
    const Eigen::VectorXd th = ds.theta(l);
    out[static_cast<std::size_t>(l)] = wasserstein_1d(project(mu, proj, th), project(nu, proj, th), p);
  }
  return out;
}

SwEstimate sw_mc(const Measure& mu, const Measure& nu, double p, const DirectionSet& ds, const Projector& proj) {
  return make_estimate(slice_costs(mu, nu, p, ds, proj), p);
}

SwEstimate sw_cv(const Measure& mu, const Measure& nu, const DirectionSet& ds, CvVariant variant) {
  const auto f = slice_costs(mu, nu, 2.0, ds, Projector::linear());
  const double d = static_cast<double>(mu.dim());
  const double mass = mu.mass();
  const Eigen::VectorXd ma = mu.mean(), mb = nu.mean();
  const Eigen::VectorXd wa = mu.weights() / mu.mass(), wb = nu.weights() / nu.mass();
  const Eigen::MatrixXd ca = mu.points().rowwise() - ma.transpose();
  const Eigen::MatrixXd cb = nu.points().rowwise() - mb.transpose();

  double B = (ma - mb).squaredNorm() / d;
  if (variant == CvVariant::Upper) B += (mu.centered_second_moment() + nu.centered_second_moment()) / d;
  B *= mass;

  const Index L = ds.size();
  std::vector<double> C(static_cast<std::size_t>(L));
  for (Index l = 0; l < L; ++l) {
    const Eigen::VectorXd th = ds.theta(l);
    const double dm = th.dot(ma - mb);
    double c = dm * dm;
    if (variant == CvVariant::Upper) {
      const Eigen::VectorXd pa = ca * th, pb = cb * th;
      c += wa.dot(pa.cwiseAbs2()) + wb.dot(pb.cwiseAbs2());
    }
    C[static_cast<std::size_t>(l)] = mass * c;
  }

  const double fbar = std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(L);
  const double cbar = std::accumulate(C.begin(), C.end(), 0.0) / static_cast<double>(L);
  double cov = 0, var = 0;
  for (std::size_t l = 0; l < f.size(); ++l) {
    cov += (f[l] - fbar) * (C[l] - cbar);
    var += (C[l] - cbar) * (C[l] - cbar);
  }
  const double gamma = var / static_cast<double>(L) < 1e-18 ? 0.0 : cov / var;
  std::vector<double> controlled(f.size());
  for (std::size_t l = 0; l < f.size(); ++l) controlled[l] = f[l] - gamma * (C[l] - B);
  return make_estimate(std::move(controlled), 2.0);
}

double sw_fast(const Measure& mu, const Measure& nu) {
  if (mu.dim() != nu.dim()) fail(ErrorCode::DimensionMismatch, "measures live in different dimensions");
  const double d = static_cast<double>(mu.dim());
  const double mean_term = (mu.mean() - nu.mean()).squaredNorm() / d;
  const double sd = std::sqrt(mu.centered_second_moment()) - std::sqrt(nu.centered_second_moment());
  return mean_term + sd * sd / d;
}

namespace {

double slice_value(const Measure& mu, const Measure& nu, double p, const Eigen::VectorXd& th) {
  return wasserstein_1d(Slice::from_unsorted(mu.points() * th, mu.weights()),
                        Slice::from_unsorted(nu.points() * th, nu.weights()), p);
}

Eigen::VectorXd max_sw_gradient(const Measure& mu, const Measure& nu, double p, const Eigen::VectorXd& th) {
  const Slice a = Slice::from_unsorted(mu.points() * th, mu.weights());
  const Slice b = Slice::from_unsorted(nu.points() * th, nu.weights());
  const auto plan = northwest_corner(a, b);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(th.size());
  for (const auto& e : plan.entries) {
    const Index i = a.perm[static_cast<std::size_t>(e.i)], j = b.perm[static_cast<std::size_t>(e.j)];
    const Eigen::VectorXd diff = (mu.atom(i) - nu.atom(j)).transpose();
    const double proj = th.dot(diff);
    const double mag = p == 2.0 ? std::abs(proj) : std::pow(std::abs(proj), p - 1);
    g += p * e.mass * mag * sign(proj) * diff;
  }
  return g;
}

}  // namespace

MaxSwResult max_sw_pga(const Measure& mu, const Measure& nu, double p, const MaxSwOptions& opt,
                       std::uint64_t seed) {
  detail::require_p(p);
  if (opt.steps < 1) fail(ErrorCode::InvalidArgument, "max-SW needs steps >= 1");
  if (opt.restarts < 1) fail(ErrorCode::InvalidArgument, "max-SW needs restarts >= 1");
  if (mu.dim() != nu.dim()) fail(ErrorCode::DimensionMismatch, "measures live in different dimensions");
  require_equal_mass(mu.mass(), nu.mass());
  const Index d = mu.dim();
  const DirectionSet starts = sample_uniform_sphere(d, opt.restarts, seed);

  MaxSwResult best;
  best.value_p = -1;
  for (int r = 0; r < opt.restarts; ++r) {
    Eigen::VectorXd th = starts.theta(r);
    if (r == 0 && opt.warm_start) {
      if (opt.warm_start->dim() != d) fail(ErrorCode::DimensionMismatch, "warm start dimension mismatch");
      const auto costs = slice_costs(mu, nu, p, *opt.warm_start);
      const auto it = std::max_element(costs.begin(), costs.end());
      th = opt.warm_start->theta(static_cast<Index>(it - costs.begin()));
    }
    double v = slice_value(mu, nu, p, th);
    if (v > best.value_p) best = {th, v, 0};
    for (int s = 0; s < opt.steps; ++s) {
      const Eigen::VectorXd next = th + opt.step_size * max_sw_gradient(mu, nu, p, th);
      const double norm = next.norm();
      if (!(norm > 0) || !std::isfinite(norm)) break;
      th = next / norm;
      v = slice_value(mu, nu, p, th);
      if (v > best.value_p) best = {th, v, 0};
    }
  }
  best.value_p = std::max(0.0, best.value_p);
  best.value = std::pow(best.value_p, 1.0 / p);
  return best;
}

SwEstimate ebsw_is(const Measure& mu, const Measure& nu, double p, const DirectionSet& ds, const EnergySpec& energy,
                   const Projector& proj) {
  auto W = slice_costs(mu, nu, p, ds, proj);
  if (std::holds_alternative<energy::Constant>(energy)) return make_estimate(std::move(W), p);
  std::vector<double> w(W.size());
  std::visit(
      [&](const auto& e) {
        using E = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<E, energy::Exponential>) {
          const double top = *std::max_element(W.begin(), W.end());
          for (std::size_t l = 0; l < W.size(); ++l) w[l] = std::exp(W[l] - top);
        } else if constexpr (std::is_same_v<E, energy::ShiftedPolynomial>) {
          if (!(e.a > 0) || !(e.eps > 0)) fail(ErrorCode::InvalidArgument, "polynomial energy needs a, eps > 0");
          for (std::size_t l = 0; l < W.size(); ++l) w[l] = std::pow(W[l], e.a) + e.eps;
        } else {
          std::fill(w.begin(), w.end(), 1.0);
        }
      },
      energy);
  const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
  const double L = static_cast<double>(W.size());
  // Rescaled so that the mean of per_slice equals the self-normalized ratio.
  std::vector<double> contrib(W.size());
  for (std::size_t l = 0; l < W.size(); ++l) contrib[l] = W[l] * w[l] * L / wsum;
  return make_estimate(std::move(contrib), p);
}

SwEstimate smooth_sw(const Measure& mu, const Measure& nu, double p, double sigma, const DirectionSet& ds,
                     std::uint64_t seed, const Projector& proj) {
  detail::require_p(p);
  if (!(sigma >= 0) || !std::isfinite(sigma)) fail(ErrorCode::InvalidArgument, "smoothing sigma must be >= 0");
  check_pair(mu, nu, ds, proj);
  std::vector<double> out(static_cast<std::size_t>(ds.size()));
  for (Index l = 0; l < ds.size(); ++l) {
    const Eigen::VectorXd th = ds.theta(l);
    Eigen::VectorXd pa = proj.project_all(mu.points(), th);
    Eigen::VectorXd pb = proj.project_all(nu.points(), th);
    if (sigma > 0) {
      const std::uint64_t sid = ds.stream_ids()[static_cast<std::size_t>(l)];
      RngStream ra(seed, 2 * sid), rb(seed, 2 * sid + 1);
      for (Index i = 0; i < pa.size(); ++i) pa(i) += sigma * ra.normal();
      for (Index j = 0; j < pb.size(); ++j) pb(j) += sigma * rb.normal();
    }
    out[static_cast<std::size_t>(l)] =
        wasserstein_1d(Slice::from_unsorted(pa, mu.weights()), Slice::from_unsorted(pb, nu.weights()), p);
  }
  return make_estimate(std::move(out), p);
}

SketchBank::SketchBank(const DirectionSet& ds, int k, std::uint64_t seed)
    : hash_(ds.hash()), dim_(ds.dim()), dirs_(ds.directions()) {
  sketches_.reserve(static_cast<std::size_t>(ds.size()));
  for (Index l = 0; l < ds.size(); ++l)
    sketches_.emplace_back(k, RngStream(mix64(seed ^ 0x4b4c4cull), ds.stream_ids()[static_cast<std::size_t>(l)]));
}

SketchBank::SketchBank(std::uint64_t ds_hash, Index dim, std::vector<KllSketch> sketches)
    : hash_(ds_hash), dim_(dim), sketches_(std::move(sketches)) {
  if (sketches_.empty()) fail(ErrorCode::EmptyInput, "sketch bank needs at least one sketch");
}

void SketchBank::insert(const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  if (dirs_.size() == 0) fail(ErrorCode::InvalidArgument, "sketch bank has no directions to insert with");
  if (x.size() != dim_) fail(ErrorCode::DimensionMismatch, "point dimension does not match the sketch bank");
  if (!x.allFinite()) fail(ErrorCode::NonFinite, "non-finite point in stream");
  const Eigen::VectorXd proj = dirs_ * x.transpose();
  for (std::size_t l = 0; l < sketches_.size(); ++l) sketches_[l].insert(proj(static_cast<Index>(l)));
}

SwEstimate sw_streaming(const SketchBank& a, const SketchBank& b, double p) {
  detail::require_p(p);
  if (a.ds_hash() != b.ds_hash() || a.sketches().size() != b.sketches().size())
    fail(ErrorCode::ProvenanceMismatch, "sketches were built with different direction sets");
  std::vector<double> out(a.sketches().size());
  for (std::size_t l = 0; l < out.size(); ++l)
    out[l] = wasserstein_1d(a.sketches()[l].to_slice(), b.sketches()[l].to_slice(), p);
  return make_estimate(std::move(out), p);
}

}  // namespace slicedot
