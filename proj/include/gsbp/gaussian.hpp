#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gsbp/error.hpp"

namespace gsbp {

/// One term w * N(x; variance, mean). variance == 0 denotes the Dirac
/// impulse delta(x - mean); such components are never point-evaluated,
/// only sifted through products and overlap integrals.
struct WeightedGaussian {
  double weight = 1.0;
  double mean = 0.0;
  double variance = 1.0;

  bool is_dirac() const noexcept { return variance == 0.0; }
};

/// Density of N(x; variance, mean). Throws on variance <= 0.
double eval_gaussian(double x, double mean, double variance);

/// log of eval_gaussian, same preconditions.
double log_eval_gaussian(double x, double mean, double variance);

/// Finite weighted sum of Gaussians (length >= 1). The `normalized` flag
/// records that the weights sum to 1 within 1e-12.
class GaussianMixture {
 public:
  explicit GaussianMixture(std::vector<WeightedGaussian> components);

  static GaussianMixture single(double weight, double mean, double variance);
  static GaussianMixture dirac(double x0);

  const std::vector<WeightedGaussian>& components() const noexcept { return components_; }
  std::size_t size() const noexcept { return components_.size(); }
  const WeightedGaussian& operator[](std::size_t i) const { return components_[i]; }

  bool normalized() const noexcept { return normalized_; }
  bool has_dirac() const noexcept;
  bool is_single_dirac() const noexcept { return components_.size() == 1 && components_[0].is_dirac(); }
  double total_weight() const noexcept;

  /// Pointwise density. Throws DiracOnGrid if any component is a Dirac.
  double eval(double x) const;

  /// Union of per-component [mean - k*sigma, mean + k*sigma] intervals.
  std::pair<double, double> envelope(double k_sigma = 10.0) const;

 private:
  friend GaussianMixture mixture_normalize(const GaussianMixture&);
  friend class MixtureBuilder;

  std::vector<WeightedGaussian> components_;
  bool normalized_ = false;
};

/// Unchecked assembly used by the arithmetic routines; the public
/// constructor validates instead.
class MixtureBuilder {
 public:
  void add(const WeightedGaussian& g) { components_.push_back(g); }
  void reserve(std::size_t n) { components_.reserve(n); }
  std::size_t size() const noexcept { return components_.size(); }
  bool empty() const noexcept { return components_.empty(); }
  GaussianMixture take(bool normalized = false);

 private:
  std::vector<WeightedGaussian> components_;
};

/// A lambda-message: either the vacuous constant-1 function or a mixture.
class Likelihood {
 public:
  static Likelihood vacuous() { return Likelihood(); }
  static Likelihood from_mixture(GaussianMixture m) { return Likelihood(std::move(m)); }

  bool is_vacuous() const noexcept { return !mixture_.has_value(); }
  const GaussianMixture& mixture() const { return mixture_.value(); }

 private:
  Likelihood() = default;
  explicit Likelihood(GaussianMixture m) : mixture_(std::move(m)) {}
  std::optional<GaussianMixture> mixture_;
};

enum class PairStatus {
  Ok,
  ZeroProduct,        // two Diracs at different points: identically zero
  DegenerateProduct,  // two Diracs at the same point: no finite scale
};

struct PairProduct {
  PairStatus status = PairStatus::Ok;
  WeightedGaussian component{};
};

/// Pointwise product of two weighted Gaussians collapsed back to a single
/// weighted Gaussian; Dirac factors sift. A ZeroProduct result carries no
/// component; a DegenerateProduct carries a weight-0 Dirac.
PairProduct product_pair(const WeightedGaussian& a, const WeightedGaussian& b);

/// The total-mass constant of the pairwise product:
/// integral of w_a N(u; va, ma) * w_b N(u; vb, mb) du. Sifts single Diracs;
/// throws DegenerateOverlap when both factors are Dirac.
double overlap_scale(const WeightedGaussian& a, const WeightedGaussian& b);
double log_overlap_scale(const WeightedGaussian& a, const WeightedGaussian& b);

/// All pairwise products; ZeroProduct pairs are dropped. Throws EmptyMixture
/// if every pair vanishes.
GaussianMixture mixture_product(const GaussianMixture& a, const GaussianMixture& b);

/// Scales weights to sum 1 and sets the normalized flag.
GaussianMixture mixture_normalize(const GaussianMixture& m);

/// Rescales so the largest weight is 1 (the lambda-message convention).
GaussianMixture mixture_scale_max_to_one(const GaussianMixture& m);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Mean and variance of a normalized mixture.
Moments mixture_moments(const GaussianMixture& m);

/// Pointwise density on an ascending grid. Throws DiracOnGrid on Dirac input.
std::vector<double> mixture_eval_grid(const GaussianMixture& m, std::span<const double> grid);

struct ReductionPolicy {
  double prune_epsilon = 0.0;
  std::size_t max_components = unbounded();

  static constexpr std::size_t unbounded() { return std::numeric_limits<std::size_t>::max(); }
  static ReductionPolicy identity() { return {}; }
  bool is_identity() const noexcept {
    return prune_epsilon <= 0.0 && max_components == unbounded();
  }
};

struct ReduceResult {
  GaussianMixture mixture;
  /// L1 distance between input and output (both sum-normalized); 0 when the
  /// reduction was a no-op, NaN when Dirac components prevent quadrature.
  double l1_change = 0.0;
};

/// Drops components below prune_epsilon, then greedily moment-matches the
/// closest pair (|mu_i - mu_j| over pooled std, lexicographic tie-break)
/// until at most max_components remain. Renormalizes only when pruning
/// changed the total weight; pure merges preserve it exactly.
ReduceResult mixture_reduce(const GaussianMixture& m, const ReductionPolicy& policy);

/// Composite-trapezoid estimate of the L1 distance between the mixture and
/// an arbitrary density over [lo, hi].
double mixture_l1_distance(const GaussianMixture& m, const std::function<double(double)>& target,
                           double lo, double hi, int n_points);

namespace detail {
/// Product of nonnegative factors, switching to log accumulation when any
/// factor drops below 1e-300.
double stable_product(std::span<const double> factors);

/// log(sum(exp(v))) over finite entries; -inf for an all-(-inf) input.
double log_sum_exp(std::span<const double> v);
}  // namespace detail

}  // namespace gsbp
