#pragma once

#include <functional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "gsbp/gaussian.hpp"
#include "gsbp/network.hpp"

namespace gsbp {

/// Density to be approximated by a Gaussian sum.
class TargetDensity {
 public:
  static TargetDensity uniform(double lo, double hi);
  static TargetDensity triangular(double lo, double mode, double hi);
  /// Piecewise-linear density from samples; renormalized by trapezoid rule.
  static TargetDensity tabulated(std::vector<double> xs, std::vector<double> ys);
  static TargetDensity gaussian_mixture(GaussianMixture m);

  double operator()(double x) const;
  double support_lo() const;
  double support_hi() const;
  bool is_gaussian_mixture() const noexcept;
  const GaussianMixture& as_gaussian_mixture() const;

 private:
  struct Uniform {
    double lo, hi;
  };
  struct Triangular {
    double lo, mode, hi;
  };
  struct Tabulated {
    std::vector<double> xs, ys;
  };
  using Body = std::variant<Uniform, Triangular, Tabulated, GaussianMixture>;

  explicit TargetDensity(Body body) : body_(std::move(body)) {}
  Body body_;
};

struct VarianceRule {
  enum class Kind { Shared, SpacingMultiple };
  Kind kind = Kind::SpacingMultiple;
  double value = 1.0;  // sigma^2 for Shared, the multiple c for SpacingMultiple

  static VarianceRule shared(double sigma2) { return {Kind::Shared, sigma2}; }
  static VarianceRule spacing(double c) { return {Kind::SpacingMultiple, c}; }

  double variance_for_spacing(double h) const;
};

/// Default spacing multiple for grid fits, chosen so the bundled example's
/// 20-component fit of the unit uniform reports ~9% L1 error.
inline constexpr double kDefaultSpacingMultiple = 0.37935345537473686;

struct FitConfig {
  int n_components = 20;
  double lo = 0.0;
  double hi = 1.0;
  VarianceRule variance_rule = VarianceRule::spacing(kDefaultSpacingMultiple);
  int refine_steps = 0;
  double step_size = 0.5;
  int quadrature_points = 2001;
};

struct FitReport {
  GaussianMixture mixture;
  double l1_error = 0.0;
  double l2_error = 0.0;
  int iterations_used = 0;
  /// Objective value at the start and after each accepted descent step;
  /// non-increasing by construction. Empty for unrefined fits.
  std::vector<double> objective_trajectory;
};

/// Interval the fit errors (and the refinement objective) are measured on:
/// the configured support padded by five standard deviations of the widest
/// mixture component.
std::pair<double, double> fit_error_interval(const GaussianMixture& m, const FitConfig& config);

/// Equal-weight components on a uniform mean grid over [lo, hi]; variance
/// from the rule; optionally refined by gradient descent on the weights.
FitReport uniform_grid_fit(const TargetDensity& target, const FitConfig& config);

/// Projected gradient descent on the weights only (means and variances
/// stay fixed); minimizes the discretized L2 objective, keeps weights
/// nonnegative and summing to one, and never accepts a step that increases
/// the objective. L1 is tracked alongside and the L1-best iterate (the
/// starting point included) is the one returned, so refinement never makes
/// the reported L1 worse.
FitReport gradient_refine(const GaussianMixture& initial, const TargetDensity& target,
                          const FitConfig& config);

/// Tensor-grid construction of a separable conditional from x = g(u) + noise:
/// one component per parent-grid cell, weight proportional to cell volume,
/// child mean g at the cell center, child variance the noise variance,
/// parent variances from the rule. Supports one or two parents.
ConditionalMixtureCPD fit_conditional(
    const std::function<double(std::span<const double>)>& g, double noise_variance,
    std::span<const std::pair<double, double>> parent_supports, std::span<const int> grid_sizes,
    const VarianceRule& parent_variance_rule = VarianceRule::spacing(kDefaultSpacingMultiple));

/// (L1, L2) distance between mixture and target by composite trapezoid.
std::pair<double, double> fit_error(const GaussianMixture& m, const TargetDensity& target,
                                    double lo, double hi, int n_points);

/// 1-D golden-section search for the spacing multiple minimizing the
/// reported L1 error of a grid fit with n_components components.
double calibrate_spacing_multiple(const TargetDensity& target, int n_components, double lo,
                                  double hi, int quadrature_points = 2001);

struct ObjectiveEval {
  double objective = 0.0;
  std::vector<double> gradient;  // d objective / d weight_i
};

/// The discretized L2 objective gradient_refine descends, with its analytic
/// weight gradient, evaluated at the mixture's current weights.
ObjectiveEval fit_objective(const GaussianMixture& m, const TargetDensity& target, double lo,
                            double hi, int n_points);

}  // namespace gsbp
