#include "slicedot/slicers.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

namespace slicedot {

Projector Projector::circular(double r) {
  if (!(r > 0) || !std::isfinite(r)) fail(ErrorCode::InvalidArgument, "circular projector needs r > 0");
  Projector p(Kind::Circular);
  p.r_ = r;
  return p;
}

Projector Projector::odd_polynomial(int degree, std::vector<std::vector<int>> multi_indices) {
  if (degree < 1 || degree % 2 == 0) fail(ErrorCode::InvalidArgument, "polynomial degree must be odd and >= 1");
  if (multi_indices.empty()) fail(ErrorCode::InvalidArgument, "polynomial projector needs multi-indices");
  const std::size_t d = multi_indices.front().size();
  for (std::size_t k = 0; k < multi_indices.size(); ++k) {
    const auto& a = multi_indices[k];
    if (a.size() != d) fail(ErrorCode::DimensionMismatch, "multi-indices differ in length", k);
    int sum = 0;
    for (int e : a) {
      if (e < 0) fail(ErrorCode::InvalidArgument, "negative exponent in multi-index", k);
      sum += e;
    }
    if (sum != degree) fail(ErrorCode::InvalidArgument, "multi-index exponents must sum to the degree", k);
  }
  Projector p(Kind::OddPolynomial);
  p.degree_ = degree;
  p.alphas_ = std::move(multi_indices);
  return p;
}

namespace {
void enumerate_indices(int remaining, std::size_t pos, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (pos + 1 == cur.size()) {
    cur[pos] = remaining;
    out.push_back(cur);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    cur[pos] = e;
    enumerate_indices(remaining - e, pos + 1, cur, out);
  }
}
}  // namespace

Projector Projector::full_odd_polynomial(Index d, int degree) {
  if (d < 1) fail(ErrorCode::InvalidArgument, "dimension must be >= 1");
  std::vector<std::vector<int>> all;
  std::vector<int> cur(static_cast<std::size_t>(d), 0);
  enumerate_indices(degree, 0, cur, all);
  return odd_polynomial(degree, std::move(all));
}

Index Projector::parameter_dim(Index d) const {
  if (kind_ == Kind::OddPolynomial) return static_cast<Index>(alphas_.size());
  return d;
}

void Projector::check_dim(Index d, Index theta_dim) const {
  if (kind_ == Kind::OddPolynomial && static_cast<Index>(alphas_.front().size()) != d)
    fail(ErrorCode::DimensionMismatch, "polynomial multi-indices do not match data dimension");
  if (theta_dim != parameter_dim(d))
    fail(ErrorCode::DimensionMismatch, "direction dimension " + std::to_string(theta_dim) +
                                           " does not match projector parameter dimension " +
                                           std::to_string(parameter_dim(d)));
}

double Projector::eval(const Eigen::VectorXd& theta, const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  check_dim(x.size(), theta.size());
  switch (kind_) {
    case Kind::Linear:
      return x.dot(theta.transpose());
    case Kind::Circular:
      return (x - r_ * theta.transpose()).norm();
    case Kind::OddPolynomial: {
      double acc = 0;
      for (std::size_t k = 0; k < alphas_.size(); ++k) {
        double mono = 1;
        for (std::size_t c = 0; c < alphas_[k].size(); ++c)
          for (int e = 0; e < alphas_[k][c]; ++e) mono *= x(static_cast<Index>(c));
        acc += theta(static_cast<Index>(k)) * mono;
      }
      return acc;
    }
  }
  return 0;
}

Eigen::VectorXd Projector::project_all(const Eigen::MatrixXd& points, const Eigen::VectorXd& theta) const {
  check_dim(points.cols(), theta.size());
  if (kind_ == Kind::Linear) return points * theta;
  Eigen::VectorXd out(points.rows());
  for (Index i = 0; i < points.rows(); ++i) out(i) = eval(theta, points.row(i));
  return out;
}

std::string Projector::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Linear: os << "linear"; break;
    case Kind::Circular: os << "circular:" << r_; break;
    case Kind::OddPolynomial: os << "poly:" << degree_ << ":" << alphas_.size(); break;
  }
  return os.str();
}

DirectionSet::DirectionSet(Eigen::MatrixXd directions, Provenance prov, std::vector<std::uint64_t> stream_ids)
    : dirs_(std::move(directions)), prov_(prov), streams_(std::move(stream_ids)) {
  if (dirs_.rows() < 1) fail(ErrorCode::EmptyInput, "direction set needs L >= 1");
  if (dirs_.cols() < 1) fail(ErrorCode::InvalidArgument, "direction dimension must be >= 1");
  for (Index l = 0; l < dirs_.rows(); ++l)
    if (!(std::abs(dirs_.row(l).norm() - 1.0) <= 1e-12))
      fail(ErrorCode::InvalidArgument, "direction " + std::to_string(l) + " is not unit norm",
           static_cast<std::size_t>(l));
  if (streams_.empty()) {
    streams_.resize(static_cast<std::size_t>(dirs_.rows()));
    for (std::size_t l = 0; l < streams_.size(); ++l) streams_[l] = l;
  }
  if (static_cast<Index>(streams_.size()) != dirs_.rows())
    fail(ErrorCode::DimensionMismatch, "one stream id per direction required");
}

std::string DirectionSet::provenance_string() const {
  return std::visit(
      [](const auto& p) -> std::string {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, provenance::Mc>) return "mc:" + std::to_string(p.seed);
        else if constexpr (std::is_same_v<P, provenance::QmcMapped>) return "qmc:" + std::to_string(p.sequence_id);
        else if constexpr (std::is_same_v<P, provenance::SpiralS2>) return "spiral";
        else if constexpr (std::is_same_v<P, provenance::RotatedQmc>) return "qmc-rot:" + std::to_string(p.seed);
        else return "custom";
      },
      prov_);
}

std::uint64_t DirectionSet::hash() const {
  std::uint64_t h = mix64(0x534c494345444f54ull ^ prov_.index());
  const auto feed = [&h](std::uint64_t v) { h = mix64(h ^ (v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2))); };
  for (char c : provenance_string()) feed(static_cast<unsigned char>(c));
  feed(static_cast<std::uint64_t>(dirs_.rows()));
  feed(static_cast<std::uint64_t>(dirs_.cols()));
  for (Index l = 0; l < dirs_.rows(); ++l)
    for (Index k = 0; k < dirs_.cols(); ++k) feed(std::bit_cast<std::uint64_t>(dirs_(l, k)));
  for (auto s : streams_) feed(s);
  return h;
}

DirectionSet sample_uniform_sphere(Index d, Index L, std::uint64_t seed) {
  if (d < 1) fail(ErrorCode::InvalidArgument, "sphere dimension must be >= 1");
  if (L < 1) fail(ErrorCode::InvalidArgument, "number of projections must be >= 1");
  Eigen::MatrixXd dirs(L, d);
  std::vector<std::uint64_t> streams(static_cast<std::size_t>(L));
  for (Index l = 0; l < L; ++l) {
    RngStream rng(seed, static_cast<std::uint64_t>(l));
    Eigen::VectorXd z(d);
    do {
      for (Index k = 0; k < d; ++k) z(k) = rng.normal();
    } while (!(z.norm() > 0));
    dirs.row(l) = Direction::normalized(z).components().transpose();
    streams[static_cast<std::size_t>(l)] = static_cast<std::uint64_t>(l);
  }
  return DirectionSet(std::move(dirs), provenance::Mc{seed}, std::move(streams));
}

double normal_quantile(double u) {
  if (!(u > 0 && u < 1)) {
    if (u == 0) return -std::numeric_limits<double>::infinity();
    if (u == 1) return std::numeric_limits<double>::infinity();
    fail(ErrorCode::InvalidArgument, "normal quantile needs u in [0, 1]");
  }
  // Acklam's rational approximation followed by one Halley refinement.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                             1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                             6.680131188771972e+01, -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                             -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00};
  static const double dd[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                              3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (u < plow) {
    const double q = std::sqrt(-2 * std::log(u));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1);
  } else if (u <= 1 - plow) {
    const double q = u - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const double q = std::sqrt(-2 * std::log1p(-u));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1);
  }
  if (u == 0.5) return 0.0;
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - u;
  const double g = e * std::sqrt(2 * std::numbers::pi) * std::exp(x * x / 2);
  return x - g / (1 + x * g / 2);
}

Eigen::VectorXd qmc_point_to_direction(const Eigen::VectorXd& x) {
  Eigen::VectorXd z(x.size());
  for (Index k = 0; k < x.size(); ++k) z(k) = normal_quantile(x(k));
  if (!z.allFinite() || !(z.norm() > 0))
    fail(ErrorCode::DegenerateDirection, "QMC point maps to a degenerate direction");
  return Direction::normalized(z).components();
}

namespace {

std::vector<std::uint64_t> first_primes(std::size_t count) {
  std::vector<std::uint64_t> primes;
  for (std::uint64_t c = 2; primes.size() < count; ++c) {
    bool prime = true;
    for (auto p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
  }
  return primes;
}

double radical_inverse(std::uint64_t i, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base), f = inv, r = 0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

}  // namespace

Eigen::MatrixXd halton(Index d, Index L, std::uint64_t sequence_id) {
  if (d < 1 || L < 1) fail(ErrorCode::InvalidArgument, "halton needs d >= 1 and L >= 1");
  const auto primes = first_primes(static_cast<std::size_t>(d));
  Eigen::MatrixXd pts(L, d);
  const std::uint64_t start = 1 + sequence_id * static_cast<std::uint64_t>(L);
  for (Index l = 0; l < L; ++l)
    for (Index k = 0; k < d; ++k)
      pts(l, k) = radical_inverse(start + static_cast<std::uint64_t>(l), primes[static_cast<std::size_t>(k)]);
  return pts;
}

DirectionSet qmc_mapped(Index d, Index L, std::uint64_t sequence_id) {
  Eigen::MatrixXd pts = halton(d, L, sequence_id);
  Eigen::MatrixXd dirs(L, d);
  const double shift = 1.0 / (2.0 * static_cast<double>(L));
  for (Index l = 0; l < L; ++l) {
    Eigen::VectorXd x = pts.row(l).transpose();
    for (Index k = 0; k < d; ++k)
      if (x(k) <= 0 || x(k) >= 1) x(k) = shift;
    try {
      dirs.row(l) = qmc_point_to_direction(x).transpose();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateDirection) throw;
      for (Index k = 0; k < d; ++k) x(k) = std::fmod(x(k) + shift, 1.0);
      for (Index k = 0; k < d; ++k)
        if (x(k) <= 0) x(k) = shift;
      dirs.row(l) = qmc_point_to_direction(x).transpose();
    }
  }
  return DirectionSet(std::move(dirs), provenance::QmcMapped{sequence_id});
}

DirectionSet spiral_s2(Index L) {
  if (L < 1) fail(ErrorCode::InvalidArgument, "spiral needs L >= 1");
  Eigen::MatrixXd dirs(L, 3);
  const double Ld = static_cast<double>(L);
  for (Index i = 1; i <= L; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) - 1.0) / Ld;
    const double phi1 = std::acos(z);
    const double phi2 = std::fmod(1.8 * std::sqrt(Ld) * phi1, 2 * std::numbers::pi);
    Eigen::Vector3d v(std::sin(phi1) * std::cos(phi2), std::sin(phi1) * std::sin(phi2), std::cos(phi1));
    dirs.row(i - 1) = (v / v.norm()).transpose();
  }
  return DirectionSet(std::move(dirs), provenance::SpiralS2{});
}

Eigen::MatrixXd random_orthogonal(Index d, RngStream& rng) {
  Eigen::MatrixXd g(d, d);
  for (Index c = 0; c < d; ++c)
    for (Index r = 0; r < d; ++r) g(r, c) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index k = 0; k < d; ++k)
    if (R(k, k) < 0) q.col(k) = -q.col(k);
  return q;
}

DirectionSet random_rotation(const DirectionSet& ds, std::uint64_t seed) {
  RngStream rng(seed, 0x726f74ull);
  const Eigen::MatrixXd U = random_orthogonal(ds.dim(), rng);
  Eigen::MatrixXd rotated = ds.directions() * U.transpose();
  for (Index l = 0; l < rotated.rows(); ++l) rotated.row(l) /= rotated.row(l).norm();
  return DirectionSet(std::move(rotated), provenance::RotatedQmc{seed}, ds.stream_ids());
}

Slice project(const Measure& m, const Projector& proj, const Eigen::VectorXd& theta) {
  return Slice::from_unsorted(proj.project_all(m.points(), theta), m.weights());
}

}  // namespace slicedot
