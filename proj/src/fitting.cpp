#include "gsbp/fitting.hpp"

#include <algorithm>
#include <cmath>

namespace gsbp {

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  const double h = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + i * h;
  return out;
}

double max_component_std(const GaussianMixture& m) {
  double v = 0.0;
  for (const auto& g : m.components()) v = std::max(v, g.variance);
  return std::sqrt(v);
}

void check_config(const FitConfig& config) {
  if (config.n_components < 1)
    throw Error(ErrorCode::InvalidArgument, "n_components must be >= 1");
  if (!(config.lo < config.hi) || !std::isfinite(config.lo) || !std::isfinite(config.hi))
    throw Error(ErrorCode::InvalidArgument, "support must be a finite interval");
  if (config.refine_steps < 0)
    throw Error(ErrorCode::InvalidArgument, "refine_steps must be >= 0");
  if (!(config.step_size > 0.0))
    throw Error(ErrorCode::InvalidArgument, "step_size must be > 0");
  if (config.quadrature_points < 2)
    throw Error(ErrorCode::InvalidArgument, "quadrature_points must be >= 2");
}

FitReport make_report(GaussianMixture m, const TargetDensity& target, const FitConfig& config,
                      int iterations) {
  auto [lo, hi] = fit_error_interval(m, config);
  auto [l1, l2] = fit_error(m, target, lo, hi, config.quadrature_points);
  return FitReport{std::move(m), l1, l2, iterations};
}

}  // namespace

TargetDensity TargetDensity::uniform(double lo, double hi) {
  if (!(lo < hi)) throw Error(ErrorCode::InvalidTarget, "uniform needs lo < hi");
  return TargetDensity(Body{Uniform{lo, hi}});
}

TargetDensity TargetDensity::triangular(double lo, double mode, double hi) {
  if (!(lo < hi) || mode < lo || mode > hi)
    throw Error(ErrorCode::InvalidTarget, "triangular needs lo <= mode <= hi, lo < hi");
  return TargetDensity(Body{Triangular{lo, mode, hi}});
}

TargetDensity TargetDensity::tabulated(std::vector<double> xs, std::vector<double> ys) {
  if (xs.size() < 2 || xs.size() != ys.size())
    throw Error(ErrorCode::InvalidTarget, "tabulated target needs >= 2 (x, y) samples");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i]) || ys[i] < 0.0)
      throw Error(ErrorCode::InvalidTarget, "tabulated samples must be finite with y >= 0");
    if (i > 0 && !(xs[i] > xs[i - 1]))
      throw Error(ErrorCode::InvalidTarget, "tabulated x grid must be strictly ascending");
  }
  double mass = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i)
    mass += 0.5 * (ys[i] + ys[i + 1]) * (xs[i + 1] - xs[i]);
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw Error(ErrorCode::InvalidTarget, "tabulated target has zero or non-finite mass");
  for (auto& y : ys) y /= mass;
  return TargetDensity(Body{Tabulated{std::move(xs), std::move(ys)}});
}

TargetDensity TargetDensity::gaussian_mixture(GaussianMixture m) {
  if (m.has_dirac())
    throw Error(ErrorCode::InvalidTarget, "Dirac components cannot serve as a fit target");
  return TargetDensity(Body{mixture_normalize(m)});
}

double TargetDensity::operator()(double x) const {
  struct Eval {
    double x;
    double operator()(const Uniform& u) const {
      return (x >= u.lo && x <= u.hi) ? 1.0 / (u.hi - u.lo) : 0.0;
    }
    double operator()(const Triangular& t) const {
      if (x < t.lo || x > t.hi) return 0.0;
      const double span = t.hi - t.lo;
      if (x < t.mode) return 2.0 * (x - t.lo) / (span * (t.mode - t.lo));
      if (x > t.mode) return 2.0 * (t.hi - x) / (span * (t.hi - t.mode));
      return 2.0 / span;
    }
    double operator()(const Tabulated& t) const {
      if (x < t.xs.front() || x > t.xs.back()) return 0.0;
      const auto it = std::upper_bound(t.xs.begin(), t.xs.end(), x);
      const std::size_t i = it == t.xs.end() ? t.xs.size() - 1
                                             : static_cast<std::size_t>(it - t.xs.begin());
      const std::size_t k = i == 0 ? 0 : i - 1;
      if (k + 1 >= t.xs.size()) return t.ys.back();
      const double f = (x - t.xs[k]) / (t.xs[k + 1] - t.xs[k]);
      return t.ys[k] + f * (t.ys[k + 1] - t.ys[k]);
    }
    double operator()(const GaussianMixture& m) const { return m.eval(x); }
  };
  return std::visit(Eval{x}, body_);
}

double TargetDensity::support_lo() const {
  struct Lo {
    double operator()(const Uniform& u) const { return u.lo; }
    double operator()(const Triangular& t) const { return t.lo; }
    double operator()(const Tabulated& t) const { return t.xs.front(); }
    double operator()(const GaussianMixture& m) const { return m.envelope(5.0).first; }
  };
  return std::visit(Lo{}, body_);
}

double TargetDensity::support_hi() const {
  struct Hi {
    double operator()(const Uniform& u) const { return u.hi; }
    double operator()(const Triangular& t) const { return t.hi; }
    double operator()(const Tabulated& t) const { return t.xs.back(); }
    double operator()(const GaussianMixture& m) const { return m.envelope(5.0).second; }
  };
  return std::visit(Hi{}, body_);
}

bool TargetDensity::is_gaussian_mixture() const noexcept {
  return std::holds_alternative<GaussianMixture>(body_);
}

const GaussianMixture& TargetDensity::as_gaussian_mixture() const {
  return std::get<GaussianMixture>(body_);
}

double VarianceRule::variance_for_spacing(double h) const {
  if (kind == Kind::Shared) {
    if (!(value > 0.0)) throw Error(ErrorCode::InvalidArgument, "shared variance must be > 0");
    return value;
  }
  if (!(value > 0.0)) throw Error(ErrorCode::InvalidArgument, "spacing multiple must be > 0");
  const double sigma = value * h;
  return sigma * sigma;
}

std::pair<double, double> fit_error_interval(const GaussianMixture& m, const FitConfig& config) {
  const double pad = 5.0 * max_component_std(m);
  return {config.lo - pad, config.hi + pad};
}

FitReport uniform_grid_fit(const TargetDensity& target, const FitConfig& config) {
  check_config(config);
  const int m_count = config.n_components;
  const double h = (config.hi - config.lo) / m_count;
  const double variance = config.variance_rule.variance_for_spacing(h);
  std::vector<WeightedGaussian> comps;
  comps.reserve(static_cast<std::size_t>(m_count));
  for (int k = 0; k < m_count; ++k)
    comps.push_back({1.0 / m_count, config.lo + (k + 0.5) * h, variance});
  GaussianMixture initial = mixture_normalize(GaussianMixture(std::move(comps)));
  if (config.refine_steps > 0) return gradient_refine(initial, target, config);
  return make_report(std::move(initial), target, config, 0);
}

ObjectiveEval fit_objective(const GaussianMixture& m, const TargetDensity& target, double lo,
                            double hi, int n_points) {
  if (n_points < 2) throw Error(ErrorCode::InvalidArgument, "n_points must be >= 2");
  const std::vector<double> grid = linspace(lo, hi, n_points);
  const double dx = (hi - lo) / (n_points - 1);
  ObjectiveEval out;
  out.gradient.assign(m.size(), 0.0);
  for (double x : grid) {
    double value = 0.0;
    for (const auto& g : m.components()) value += g.weight * eval_gaussian(x, g.mean, g.variance);
    const double resid = value - target(x);
    out.objective += resid * resid * dx;
    for (std::size_t i = 0; i < m.size(); ++i)
      out.gradient[i] += 2.0 * resid * eval_gaussian(x, m[i].mean, m[i].variance) * dx;
  }
  return out;
}

FitReport gradient_refine(const GaussianMixture& initial, const TargetDensity& target,
                          const FitConfig& config) {
  check_config(config);
  auto [lo, hi] = fit_error_interval(initial, config);
  const std::vector<double> grid = linspace(lo, hi, config.quadrature_points);
  const double dx = (hi - lo) / (config.quadrature_points - 1);
  const std::size_t m_count = initial.size();

  // fixed shapes: only the weights move
  std::vector<std::vector<double>> basis(m_count);
  for (std::size_t i = 0; i < m_count; ++i) {
    basis[i].reserve(grid.size());
    for (double x : grid)
      basis[i].push_back(eval_gaussian(x, initial[i].mean, initial[i].variance));
  }
  std::vector<double> target_values;
  target_values.reserve(grid.size());
  for (double x : grid) target_values.push_back(target(x));

  auto objective = [&](std::span<const double> w) {
    double acc = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      double value = 0.0;
      for (std::size_t i = 0; i < m_count; ++i) value += w[i] * basis[i][g];
      const double resid = value - target_values[g];
      acc += resid * resid * dx;
    }
    return acc;
  };
  auto gradient = [&](std::span<const double> w, std::vector<double>& grad) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      double value = 0.0;
      for (std::size_t i = 0; i < m_count; ++i) value += w[i] * basis[i][g];
      const double r2dx = 2.0 * (value - target_values[g]) * dx;
      for (std::size_t i = 0; i < m_count; ++i) grad[i] += r2dx * basis[i][g];
    }
  };
  // clip to >= 0 and renormalize to sum 1; false when everything clipped away
  auto project = [&](std::vector<double>& w) {
    double sum = 0.0;
    for (auto& wi : w) {
      wi = std::max(0.0, wi);
      sum += wi;
    }
    if (!(sum > 0.0) || !std::isfinite(sum)) return false;
    for (auto& wi : w) wi /= sum;
    return true;
  };

  // L1 on the same grid, accumulated exactly as mixture_l1_distance does so
  // the reported error reproduces bit for bit
  auto l1_of = [&](std::span<const double> w) {
    double acc = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      double value = 0.0;
      for (std::size_t i = 0; i < m_count; ++i) value += w[i] * basis[i][g];
      const double d = std::abs(value - target_values[g]);
      acc += (g == 0 || g + 1 == grid.size()) ? 0.5 * d : d;
    }
    return acc * dx;
  };

  std::vector<double> weights(m_count);
  for (std::size_t i = 0; i < m_count; ++i) weights[i] = initial[i].weight;
  double obj = objective(weights);
  if (!std::isfinite(obj)) throw Error(ErrorCode::FitDiverged, "non-finite objective");

  std::vector<double> best_weights = weights;
  double best_l1 = l1_of(weights);
  std::vector<double> trajectory{obj};

  std::vector<double> grad(m_count), candidate(m_count);
  int accepted = 0;
  for (int iter = 0; iter < config.refine_steps; ++iter) {
    gradient(weights, grad);
    double step = config.step_size;
    bool ok = false;
    double cand_obj = obj;
    for (int halving = 0; halving <= 30; ++halving) {
      for (std::size_t i = 0; i < m_count; ++i) candidate[i] = weights[i] - step * grad[i];
      if (project(candidate)) {
        cand_obj = objective(candidate);
        if (!std::isfinite(cand_obj)) throw Error(ErrorCode::FitDiverged, "non-finite objective");
        if (cand_obj <= obj) {
          ok = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!ok) break;
    const double improvement = obj - cand_obj;
    weights.swap(candidate);
    obj = cand_obj;
    trajectory.push_back(obj);
    ++accepted;
    const double l1 = l1_of(weights);
    if (l1 < best_l1) {
      best_l1 = l1;
      best_weights = weights;
    }
    if (improvement < 1e-12) break;
  }

  std::vector<WeightedGaussian> comps = initial.components();
  for (std::size_t i = 0; i < m_count; ++i) comps[i].weight = best_weights[i];
  GaussianMixture refined = mixture_normalize(GaussianMixture(std::move(comps)));
  FitReport report = make_report(std::move(refined), target, config, accepted);
  report.objective_trajectory = std::move(trajectory);
  return report;
}

ConditionalMixtureCPD fit_conditional(const std::function<double(std::span<const double>)>& g,
                                      double noise_variance,
                                      std::span<const std::pair<double, double>> parent_supports,
                                      std::span<const int> grid_sizes,
                                      const VarianceRule& parent_variance_rule) {
  const std::size_t n = parent_supports.size();
  if (n < 1 || n > 2)
    throw Error(ErrorCode::UnsupportedArity, "tensor-grid conditionals support 1 or 2 parents");
  if (grid_sizes.size() != n)
    throw Error(ErrorCode::ArityMismatch, "grid size count != parent count");
  if (!(noise_variance > 0.0))
    throw Error(ErrorCode::InvalidVariance, "noise variance must be > 0");

  std::vector<double> spacing(n), variance(n);
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [lo, hi] = parent_supports[i];
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
      throw Error(ErrorCode::InvalidArgument, "parent support must be a finite interval");
    if (grid_sizes[i] < 1) throw Error(ErrorCode::InvalidArgument, "grid size must be >= 1");
    spacing[i] = (hi - lo) / grid_sizes[i];
    variance[i] = parent_variance_rule.variance_for_spacing(spacing[i]);
    total *= static_cast<std::size_t>(grid_sizes[i]);
  }
  double cell = 1.0;
  for (double h : spacing) cell *= h;

  ConditionalMixtureCPD cpd;
  cpd.components.reserve(total);
  std::vector<std::size_t> idx(n, 0);
  std::vector<double> point(n);
  for (;;) {
    CpdComponent comp;
    comp.parents.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      point[i] = parent_supports[i].first + (static_cast<double>(idx[i]) + 0.5) * spacing[i];
      comp.parents[i] = {point[i], variance[i]};
    }
    const double gm = g(point);
    if (!std::isfinite(gm))
      throw Error(ErrorCode::InvalidFunction, "g returned a non-finite value on the grid");
    comp.weight = cell;
    comp.child_mean = gm;
    comp.child_variance = noise_variance;
    cpd.components.push_back(std::move(comp));
    std::size_t d = 0;
    while (d < n && ++idx[d] == static_cast<std::size_t>(grid_sizes[d])) idx[d++] = 0;
    if (d == n) break;
  }
  double total_weight = 0.0;
  for (const auto& c : cpd.components) total_weight += c.weight;
  for (auto& c : cpd.components) c.weight /= total_weight;
  return cpd;
}

std::pair<double, double> fit_error(const GaussianMixture& m, const TargetDensity& target,
                                    double lo, double hi, int n_points) {
  const double l1 =
      mixture_l1_distance(m, [&](double x) { return target(x); }, lo, hi, n_points);
  const double h = (hi - lo) / (n_points - 1);
  double acc = 0.0;
  for (int i = 0; i < n_points; ++i) {
    const double x = lo + i * h;
    const double d = m.eval(x) - target(x);
    acc += (i == 0 || i == n_points - 1) ? 0.5 * d * d : d * d;
  }
  return {l1, std::sqrt(acc * h)};
}

double calibrate_spacing_multiple(const TargetDensity& target, int n_components, double lo,
                                  double hi, int quadrature_points) {
  auto l1_at = [&](double c) {
    FitConfig config;
    config.n_components = n_components;
    config.lo = lo;
    config.hi = hi;
    config.variance_rule = VarianceRule::spacing(c);
    config.quadrature_points = quadrature_points;
    return uniform_grid_fit(target, config).l1_error;
  };
  double a = 0.05, b = 3.0;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = l1_at(c), fd = l1_at(d);
  while (b - a > 1e-6) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = l1_at(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = l1_at(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace gsbp
