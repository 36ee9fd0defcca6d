#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "slicedot/kll.hpp"
#include "slicedot/measures.hpp"
#include "slicedot/slicers.hpp"

namespace slicedot {

struct SwEstimate {
  double value_p = 0;  ///< estimate of SW_p^p
  double value = 0;    ///< value_p^(1/p)
  std::vector<double> per_slice;
  std::optional<double> std_error;
};

/// Mean of per-slice costs with sample-std / sqrt(L) standard error.
SwEstimate make_estimate(std::vector<double> per_slice, double p);

/// W_p^p between the projections of mu and nu along every direction.
std::vector<double> slice_costs(const Measure& mu, const Measure& nu, double p, const DirectionSet& ds,
                                const Projector& proj = Projector::linear());

SwEstimate sw_mc(const Measure& mu, const Measure& nu, double p, const DirectionSet& ds,
                 const Projector& proj = Projector::linear());

enum class CvVariant { Lower, Upper };

/// Gaussian-approximation control variate estimate of SW_2^2 (linear slices).
SwEstimate sw_cv(const Measure& mu, const Measure& nu, const DirectionSet& ds, CvVariant variant);

/// Closed-form approximation of SW_2^2 from means and centered second moments.
double sw_fast(const Measure& mu, const Measure& nu);

struct MaxSwOptions {
  int steps = 100;
  double step_size = 0.1;
  int restarts = 4;
  /// Optional slices to warm start from; the best one seeds the first restart.
  const DirectionSet* warm_start = nullptr;
};

struct MaxSwResult {
  Eigen::VectorXd theta;
  double value_p = 0;
  double value = 0;
};

/// Projected gradient ascent on theta -> W_p^p(theta#mu, theta#nu).
MaxSwResult max_sw_pga(const Measure& mu, const Measure& nu, double p, const MaxSwOptions& opt, std::uint64_t seed);

namespace energy {
struct Exponential {};
struct ShiftedPolynomial {
  double a;
  double eps;
};
struct Constant {};
}  // namespace energy

using EnergySpec = std::variant<energy::Exponential, energy::ShiftedPolynomial, energy::Constant>;

/// Self-normalized importance-sampling estimate of EBSW_p^p with a uniform
/// proposal, so slice weights are f(W_l).
SwEstimate ebsw_is(const Measure& mu, const Measure& nu, double p, const DirectionSet& ds, const EnergySpec& energy,
                   const Projector& proj = Projector::linear());

/// Slices perturbed by N(0, sigma^2) noise drawn from each direction's stream.
SwEstimate smooth_sw(const Measure& mu, const Measure& nu, double p, double sigma, const DirectionSet& ds,
                     std::uint64_t seed, const Projector& proj = Projector::linear());

/// One KLL sketch of <theta_l, x> per direction of a DirectionSet.
class SketchBank {
 public:
  SketchBank(const DirectionSet& ds, int k, std::uint64_t seed);
  SketchBank(std::uint64_t ds_hash, Index dim, std::vector<KllSketch> sketches);

  void insert(const Eigen::Ref<const Eigen::RowVectorXd>& x);

  std::uint64_t ds_hash() const noexcept { return hash_; }
  Index dim() const noexcept { return dim_; }
  const std::vector<KllSketch>& sketches() const noexcept { return sketches_; }

 private:
  std::uint64_t hash_;
  Index dim_;
  Eigen::MatrixXd dirs_;
  std::vector<KllSketch> sketches_;
};

/// Mean over directions of exact W_p^p between the sketch distributions.
SwEstimate sw_streaming(const SketchBank& a, const SketchBank& b, double p);

}  // namespace slicedot
