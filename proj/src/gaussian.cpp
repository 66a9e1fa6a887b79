#include "gsbp/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gsbp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kLinearUnderflow = 1e-300;

void check_component(const WeightedGaussian& g) {
  if (!std::isfinite(g.weight) || !std::isfinite(g.mean) || !std::isfinite(g.variance))
    throw Error(ErrorCode::InvalidArgument, "non-finite component");
  if (g.weight < 0.0) throw Error(ErrorCode::InvalidArgument, "negative weight");
  if (g.variance < 0.0) throw Error(ErrorCode::InvalidVariance, "negative variance");
}

}  // namespace

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DiracEvaluation: return "DiracEvaluation";
    case ErrorCode::InvalidVariance: return "InvalidVariance";
    case ErrorCode::DegenerateOverlap: return "DegenerateOverlap";
    case ErrorCode::EmptyMixture: return "EmptyMixture";
    case ErrorCode::NormalizationFailure: return "NormalizationFailure";
    case ErrorCode::DiracOnGrid: return "DiracOnGrid";
    case ErrorCode::EmptyLikelihood: return "EmptyLikelihood";
    case ErrorCode::DuplicateNodeId: return "DuplicateNodeId";
    case ErrorCode::UnknownParent: return "UnknownParent";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::RootWithoutPrior: return "RootWithoutPrior";
    case ErrorCode::PriorWithParents: return "PriorWithParents";
    case ErrorCode::UndirectedCycle: return "UndirectedCycle";
    case ErrorCode::DirectedCycle: return "DirectedCycle";
    case ErrorCode::ContradictoryEvidence: return "ContradictoryEvidence";
    case ErrorCode::InvalidTarget: return "InvalidTarget";
    case ErrorCode::FitDiverged: return "FitDiverged";
    case ErrorCode::InvalidFunction: return "InvalidFunction";
    case ErrorCode::UnsupportedArity: return "UnsupportedArity";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "UnknownError";
}

double eval_gaussian(double x, double mean, double variance) {
  if (variance < 0.0) throw Error(ErrorCode::InvalidVariance, "negative variance");
  if (variance == 0.0)
    throw Error(ErrorCode::DiracEvaluation, "cannot point-evaluate a Dirac component");
  const double d = x - mean;
  return std::exp(-d * d / (2.0 * variance)) / std::sqrt(kTwoPi * variance);
}

double log_eval_gaussian(double x, double mean, double variance) {
  if (variance < 0.0) throw Error(ErrorCode::InvalidVariance, "negative variance");
  if (variance == 0.0)
    throw Error(ErrorCode::DiracEvaluation, "cannot point-evaluate a Dirac component");
  const double d = x - mean;
  return -0.5 * std::log(kTwoPi * variance) - d * d / (2.0 * variance);
}

GaussianMixture::GaussianMixture(std::vector<WeightedGaussian> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw Error(ErrorCode::EmptyMixture, "mixture needs >= 1 component");
  double sum = 0.0;
  for (const auto& g : components_) {
    check_component(g);
    sum += g.weight;
  }
  normalized_ = std::abs(sum - 1.0) <= 1e-12;
}

GaussianMixture GaussianMixture::single(double weight, double mean, double variance) {
  return GaussianMixture({WeightedGaussian{weight, mean, variance}});
}

GaussianMixture GaussianMixture::dirac(double x0) {
  return GaussianMixture({WeightedGaussian{1.0, x0, 0.0}});
}

bool GaussianMixture::has_dirac() const noexcept {
  return std::any_of(components_.begin(), components_.end(),
                     [](const WeightedGaussian& g) { return g.is_dirac(); });
}

double GaussianMixture::total_weight() const noexcept {
  double sum = 0.0;
  for (const auto& g : components_) sum += g.weight;
  return sum;
}

double GaussianMixture::eval(double x) const {
  double acc = 0.0;
  for (const auto& g : components_) {
    if (g.is_dirac()) throw Error(ErrorCode::DiracOnGrid, "Dirac component has no pointwise density");
    acc += g.weight * eval_gaussian(x, g.mean, g.variance);
  }
  return acc;
}

std::pair<double, double> GaussianMixture::envelope(double k_sigma) const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& g : components_) {
    const double s = std::sqrt(g.variance);
    lo = std::min(lo, g.mean - k_sigma * s);
    hi = std::max(hi, g.mean + k_sigma * s);
  }
  return {lo, hi};
}

GaussianMixture MixtureBuilder::take(bool normalized) {
  if (components_.empty()) throw Error(ErrorCode::EmptyMixture, "no components assembled");
  GaussianMixture m(std::move(components_));
  m.normalized_ = normalized;
  components_.clear();
  return m;
}

PairProduct product_pair(const WeightedGaussian& a, const WeightedGaussian& b) {
  check_component(a);
  check_component(b);
  if (a.is_dirac() && b.is_dirac()) {
    if (a.mean != b.mean) return {PairStatus::ZeroProduct, {}};
    return {PairStatus::DegenerateProduct, WeightedGaussian{0.0, a.mean, 0.0}};
  }
  if (a.is_dirac()) {
    const double scale = a.weight * b.weight * eval_gaussian(a.mean, b.mean, b.variance);
    return {PairStatus::Ok, WeightedGaussian{scale, a.mean, 0.0}};
  }
  if (b.is_dirac()) {
    const double scale = a.weight * b.weight * eval_gaussian(b.mean, a.mean, a.variance);
    return {PairStatus::Ok, WeightedGaussian{scale, b.mean, 0.0}};
  }
  const double vsum = a.variance + b.variance;
  const double variance = a.variance * b.variance / vsum;
  const double mean = (a.mean * b.variance + b.mean * a.variance) / vsum;
  const double weight = a.weight * b.weight * eval_gaussian(a.mean, b.mean, vsum);
  return {PairStatus::Ok, WeightedGaussian{weight, mean, variance}};
}

double overlap_scale(const WeightedGaussian& a, const WeightedGaussian& b) {
  check_component(a);
  check_component(b);
  if (a.is_dirac() && b.is_dirac())
    throw Error(ErrorCode::DegenerateOverlap, "Dirac-Dirac overlap is undefined");
  if (a.is_dirac()) return a.weight * b.weight * eval_gaussian(a.mean, b.mean, b.variance);
  if (b.is_dirac()) return a.weight * b.weight * eval_gaussian(b.mean, a.mean, a.variance);
  return a.weight * b.weight * eval_gaussian(a.mean, b.mean, a.variance + b.variance);
}

double log_overlap_scale(const WeightedGaussian& a, const WeightedGaussian& b) {
  check_component(a);
  check_component(b);
  if (a.is_dirac() && b.is_dirac())
    throw Error(ErrorCode::DegenerateOverlap, "Dirac-Dirac overlap is undefined");
  const double lw = std::log(a.weight) + std::log(b.weight);
  if (a.is_dirac()) return lw + log_eval_gaussian(a.mean, b.mean, b.variance);
  if (b.is_dirac()) return lw + log_eval_gaussian(b.mean, a.mean, a.variance);
  return lw + log_eval_gaussian(a.mean, b.mean, a.variance + b.variance);
}

GaussianMixture mixture_product(const GaussianMixture& a, const GaussianMixture& b) {
  MixtureBuilder out;
  out.reserve(a.size() * b.size());
  for (const auto& ga : a.components()) {
    for (const auto& gb : b.components()) {
      PairProduct p = product_pair(ga, gb);
      if (p.status == PairStatus::ZeroProduct) continue;
      out.add(p.component);
    }
  }
  if (out.empty())
    throw Error(ErrorCode::EmptyMixture, "all pairwise products are identically zero");
  return out.take();
}

GaussianMixture mixture_normalize(const GaussianMixture& m) {
  const double sum = m.total_weight();
  if (!(sum > 0.0) || !std::isfinite(sum))
    throw Error(ErrorCode::NormalizationFailure, "total weight is zero or non-finite");
  std::vector<WeightedGaussian> comps = m.components();
  for (auto& g : comps) g.weight /= sum;
  GaussianMixture out(std::move(comps));
  out.normalized_ = true;
  return out;
}

GaussianMixture mixture_scale_max_to_one(const GaussianMixture& m) {
  double max_w = 0.0;
  for (const auto& g : m.components()) max_w = std::max(max_w, g.weight);
  if (!(max_w > 0.0) || !std::isfinite(max_w))
    throw Error(ErrorCode::NormalizationFailure, "max weight is zero or non-finite");
  std::vector<WeightedGaussian> comps = m.components();
  for (auto& g : comps) g.weight /= max_w;
  return GaussianMixture(std::move(comps));
}

Moments mixture_moments(const GaussianMixture& m) {
  if (!m.normalized())
    throw Error(ErrorCode::InvalidArgument, "moments require a normalized mixture");
  const bool any_dirac = m.has_dirac();
  if (any_dirac) {
    const bool all_dirac = std::all_of(m.components().begin(), m.components().end(),
                                       [](const WeightedGaussian& g) { return g.is_dirac(); });
    if (!all_dirac)
      throw Error(ErrorCode::InvalidArgument, "moments of a mixed Dirac/Gaussian mixture");
  }
  double mean = 0.0;
  for (const auto& g : m.components()) mean += g.weight * g.mean;
  double second = 0.0;
  for (const auto& g : m.components()) second += g.weight * (g.variance + g.mean * g.mean);
  return {mean, std::max(0.0, second - mean * mean)};
}

std::vector<double> mixture_eval_grid(const GaussianMixture& m, std::span<const double> grid) {
  if (m.has_dirac())
    throw Error(ErrorCode::DiracOnGrid, "Dirac beliefs are reported symbolically, not gridded");
  std::vector<double> out;
  out.reserve(grid.size());
  for (double x : grid) out.push_back(m.eval(x));
  return out;
}

namespace {

double merge_distance(const WeightedGaussian& a, const WeightedGaussian& b) {
  const double pooled = 0.5 * (a.variance + b.variance);
  if (pooled == 0.0)
    return a.mean == b.mean ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(a.mean - b.mean) / std::sqrt(pooled);
}

WeightedGaussian merge_pair(const WeightedGaussian& a, const WeightedGaussian& b) {
  const double w = a.weight + b.weight;
  if (w <= 0.0) return {0.0, 0.5 * (a.mean + b.mean), 0.5 * (a.variance + b.variance)};
  const double mean = (a.weight * a.mean + b.weight * b.mean) / w;
  const double second = (a.weight * (a.variance + a.mean * a.mean) +
                         b.weight * (b.variance + b.mean * b.mean)) / w;
  return {w, mean, std::max(0.0, second - mean * mean)};
}

double reduction_l1(const GaussianMixture& before, const GaussianMixture& after) {
  if (before.has_dirac() || after.has_dirac())
    return std::numeric_limits<double>::quiet_NaN();
  const GaussianMixture a = mixture_normalize(before);
  const GaussianMixture b = mixture_normalize(after);
  auto [lo_a, hi_a] = a.envelope();
  auto [lo_b, hi_b] = b.envelope();
  const double lo = std::min(lo_a, lo_b), hi = std::max(hi_a, hi_b);
  const int n = 4001;
  const double h = (hi - lo) / (n - 1);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = lo + i * h;
    const double d = std::abs(a.eval(x) - b.eval(x));
    acc += (i == 0 || i == n - 1) ? 0.5 * d : d;
  }
  return acc * h;
}

}  // namespace

ReduceResult mixture_reduce(const GaussianMixture& m, const ReductionPolicy& policy) {
  if (policy.is_identity()) return {m, 0.0};

  std::vector<WeightedGaussian> comps = m.components();
  bool pruned = false;
  if (policy.prune_epsilon > 0.0) {
    std::vector<WeightedGaussian> kept;
    kept.reserve(comps.size());
    for (const auto& g : comps)
      if (g.weight >= policy.prune_epsilon) kept.push_back(g);
    if (kept.empty()) {
      // never emit an empty mixture; keep the heaviest component
      auto it = std::max_element(comps.begin(), comps.end(),
                                 [](const auto& a, const auto& b) { return a.weight < b.weight; });
      kept.push_back(*it);
    }
    pruned = kept.size() != comps.size();
    comps = std::move(kept);
  }

  bool merged = false;
  while (comps.size() > policy.max_components) {
    std::size_t best_i = 0, best_j = 1;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < comps.size(); ++i) {
      for (std::size_t j = i + 1; j < comps.size(); ++j) {
        const double d = merge_distance(comps[i], comps[j]);
        if (d < best_d) {
          best_d = d;
          best_i = i;
          best_j = j;
        }
      }
    }
    comps[best_i] = merge_pair(comps[best_i], comps[best_j]);
    comps.erase(comps.begin() + static_cast<std::ptrdiff_t>(best_j));
    merged = true;
  }

  if (!pruned && !merged) return {m, 0.0};

  GaussianMixture out(std::move(comps));
  if (pruned) out = mixture_normalize(out);
  const double l1 = reduction_l1(m, out);
  return {std::move(out), l1};
}

double mixture_l1_distance(const GaussianMixture& m, const std::function<double(double)>& target,
                           double lo, double hi, int n_points) {
  if (n_points < 2) throw Error(ErrorCode::InvalidArgument, "n_points must be >= 2");
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw Error(ErrorCode::InvalidArgument, "support must be a finite interval");
  if (m.has_dirac())
    throw Error(ErrorCode::DiracOnGrid, "Dirac components have no pointwise density");
  const double h = (hi - lo) / (n_points - 1);
  double acc = 0.0;
  for (int i = 0; i < n_points; ++i) {
    const double x = lo + i * h;
    const double d = std::abs(m.eval(x) - target(x));
    acc += (i == 0 || i == n_points - 1) ? 0.5 * d : d;
  }
  return acc * h;
}

namespace detail {

double stable_product(std::span<const double> factors) {
  bool tiny = false;
  double prod = 1.0;
  for (double f : factors) {
    if (f < 0.0) throw Error(ErrorCode::InvalidArgument, "negative factor");
    if (f == 0.0) return 0.0;
    if (f < kLinearUnderflow) tiny = true;
    prod *= f;
  }
  if (!tiny) return prod;
  double lg = 0.0;
  for (double f : factors) lg += std::log(f);
  return std::exp(lg);
}

double log_sum_exp(std::span<const double> v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - mx);
  return mx + std::log(acc);
}

}  // namespace detail

}  // namespace gsbp
