#include "gsbp/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace gsbp {

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

GaussianMixture mixture_from(std::vector<WeightedGaussian> comps) {
  return GaussianMixture(std::move(comps));
}

// gamma/psi underflow rescue: recompute the factorized weights entirely in
// log domain and rescale by the maximum. Relative structure is preserved;
// callers normalize afterwards.
std::vector<double> rescale_from_logs(std::vector<double> logs) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : logs) mx = std::max(mx, v);
  std::vector<double> out(logs.size(), 0.0);
  if (!std::isfinite(mx)) return out;
  for (std::size_t i = 0; i < logs.size(); ++i) out[i] = std::exp(logs[i] - mx);
  return out;
}

double log_mixture_overlap(const WeightedGaussian& factor, const GaussianMixture& pi) {
  std::vector<double> terms;
  terms.reserve(pi.size());
  for (const auto& c : pi.components()) {
    if (c.weight == 0.0) continue;
    terms.push_back(log_overlap_scale(factor, c));
  }
  if (terms.empty()) return -std::numeric_limits<double>::infinity();
  return detail::log_sum_exp(terms);
}

}  // namespace

Likelihood combine_lambda(std::span<const Likelihood> children_msgs,
                          const ReductionPolicy& policy) {
  std::vector<const GaussianMixture*> active;
  for (const auto& l : children_msgs)
    if (!l.is_vacuous()) active.push_back(&l.mixture());
  if (active.empty()) return Likelihood::vacuous();
  if (active.size() == 1) return Likelihood::from_mixture(*active.front());

  GaussianMixture acc = *active.front();
  for (std::size_t i = 1; i < active.size(); ++i) {
    GaussianMixture prod = [&] {
      try {
        return mixture_product(acc, *active[i]);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::EmptyMixture)
          throw Error(ErrorCode::EmptyLikelihood, "contradictory Dirac evidence in child messages");
        throw;
      }
    }();
    prod = mixture_scale_max_to_one(prod);
    acc = mixture_reduce(prod, policy).mixture;
  }
  return Likelihood::from_mixture(mixture_scale_max_to_one(acc));
}

std::vector<double> pi_component_weights(const ConditionalMixtureCPD& cpd,
                                         std::span<const GaussianMixture> parent_pis) {
  const std::size_t n = cpd.parent_count();
  if (parent_pis.size() != n)
    throw Error(ErrorCode::ArityMismatch, "parent message count != conditional arity");

  std::vector<double> gamma(cpd.components.size(), 0.0);
  std::vector<double> factors(n);
  bool all_zero = true;
  for (std::size_t j = 0; j < cpd.components.size(); ++j) {
    const auto& comp = cpd.components[j];
    for (std::size_t i = 0; i < n; ++i) {
      const WeightedGaussian factor{1.0, comp.parents[i].mean, comp.parents[i].variance};
      double sum = 0.0;
      for (const auto& pc : parent_pis[i].components()) sum += overlap_scale(factor, pc);
      factors[i] = sum;
    }
    gamma[j] = comp.weight * detail::stable_product(factors);
    if (gamma[j] > 0.0) all_zero = false;
  }
  if (all_zero && !cpd.components.empty()) {
    std::vector<double> logs(cpd.components.size());
    for (std::size_t j = 0; j < cpd.components.size(); ++j) {
      const auto& comp = cpd.components[j];
      double lg = std::log(comp.weight);
      for (std::size_t i = 0; i < n; ++i) {
        const WeightedGaussian factor{1.0, comp.parents[i].mean, comp.parents[i].variance};
        lg += log_mixture_overlap(factor, parent_pis[i]);
      }
      logs[j] = lg;
    }
    gamma = rescale_from_logs(std::move(logs));
  }
  return gamma;
}

GaussianMixture compute_pi_mixture(const ConditionalMixtureCPD& cpd,
                                   std::span<const GaussianMixture> parent_pis,
                                   const ReductionPolicy& policy) {
  const std::vector<double> gamma = pi_component_weights(cpd, parent_pis);
  std::vector<WeightedGaussian> comps;
  comps.reserve(gamma.size());
  for (std::size_t j = 0; j < gamma.size(); ++j)
    comps.push_back({gamma[j], cpd.components[j].child_mean, cpd.components[j].child_variance});
  return mixture_reduce(mixture_normalize(mixture_from(std::move(comps))), policy).mixture;
}

GaussianMixture compute_pi_linear(const LinearCPD& cpd,
                                  std::span<const GaussianMixture> parent_pis,
                                  const ReductionPolicy& policy) {
  const std::size_t n = cpd.coefficients.size();
  if (parent_pis.size() != n)
    throw Error(ErrorCode::ArityMismatch, "parent message count != coefficient count");

  std::vector<WeightedGaussian> comps;
  if (n == 0) {
    comps.push_back({1.0, 0.0, cpd.noise_variance});
  } else {
    std::vector<std::size_t> idx(n, 0);
    std::vector<double> ws(n);
    for (;;) {
      double variance = cpd.noise_variance;
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto& pc = parent_pis[i].components()[idx[i]];
        const double b = cpd.coefficients[i];
        ws[i] = pc.weight;
        variance += b * b * pc.variance;
        mean += b * pc.mean;
      }
      comps.push_back({detail::stable_product(ws), mean, variance});
      std::size_t d = 0;
      while (d < n && ++idx[d] == parent_pis[d].size()) idx[d++] = 0;
      if (d == n) break;
    }
  }
  return mixture_reduce(mixture_normalize(mixture_from(std::move(comps))), policy).mixture;
}

GaussianMixture compute_belief(const GaussianMixture& pi, const Likelihood& lambda,
                               const ReductionPolicy& policy) {
  if (lambda.is_vacuous()) return mixture_reduce(pi, policy).mixture;
  const GaussianMixture& lm = lambda.mixture();

  if (lm.is_single_dirac()) {
    const double x0 = lm[0].mean;
    if (pi.is_single_dirac()) {
      if (pi[0].mean != x0)
        throw Error(ErrorCode::EmptyLikelihood, "Dirac evidence contradicts a Dirac prior");
      return GaussianMixture::dirac(x0);
    }
    double mass = 0.0;
    bool dirac_hit = false;
    for (const auto& c : pi.components()) {
      if (c.is_dirac())
        dirac_hit = dirac_hit || (c.mean == x0 && c.weight > 0.0);
      else
        mass += c.weight * eval_gaussian(x0, c.mean, c.variance);
    }
    if (mass <= 0.0 && !dirac_hit)
      throw Error(ErrorCode::NormalizationFailure, "evidence point has zero density");
    return GaussianMixture::dirac(x0);
  }
  if (pi.is_single_dirac()) {
    const double x0 = pi[0].mean;
    double mass = 0.0;
    bool dirac_hit = false;
    for (const auto& c : lm.components()) {
      if (c.is_dirac())
        dirac_hit = dirac_hit || (c.mean == x0 && c.weight > 0.0);
      else
        mass += c.weight * eval_gaussian(x0, c.mean, c.variance);
    }
    if (mass <= 0.0 && !dirac_hit)
      throw Error(ErrorCode::NormalizationFailure, "likelihood vanishes at the Dirac pi");
    return GaussianMixture::dirac(x0);
  }

  return mixture_reduce(mixture_normalize(mixture_product(pi, lm)), policy).mixture;
}

GaussianMixture pi_message_to_child(const GaussianMixture& pi,
                                    std::span<const Likelihood> child_lambdas,
                                    std::size_t target_index, const ReductionPolicy& policy) {
  if (target_index >= child_lambdas.size())
    throw Error(ErrorCode::InvalidArgument, "target child index out of range");
  std::vector<Likelihood> rest;
  rest.reserve(child_lambdas.size() - 1);
  for (std::size_t i = 0; i < child_lambdas.size(); ++i)
    if (i != target_index) rest.push_back(child_lambdas[i]);
  return compute_belief(pi, combine_lambda(rest, policy), policy);
}

std::vector<double> lambda_component_weights(const ConditionalMixtureCPD& cpd,
                                             const GaussianMixture& lambda_mixture,
                                             std::span<const GaussianMixture> other_parent_pis,
                                             std::size_t target_index) {
  const std::size_t n = cpd.parent_count();
  if (target_index >= n) throw Error(ErrorCode::InvalidArgument, "target parent index out of range");
  if (other_parent_pis.size() + 1 != n)
    throw Error(ErrorCode::ArityMismatch, "co-parent message count != arity - 1");

  std::vector<double> psi(cpd.components.size(), 0.0);
  std::vector<double> factors;
  factors.reserve(n);
  bool all_zero = true;
  for (std::size_t j = 0; j < cpd.components.size(); ++j) {
    const auto& comp = cpd.components[j];
    factors.clear();
    const WeightedGaussian child_factor{1.0, comp.child_mean, comp.child_variance};
    double child_sum = 0.0;
    for (const auto& lc : lambda_mixture.components())
      child_sum += overlap_scale(child_factor, lc);
    factors.push_back(child_sum);
    for (std::size_t k = 0, o = 0; k < n; ++k) {
      if (k == target_index) continue;
      const WeightedGaussian factor{1.0, comp.parents[k].mean, comp.parents[k].variance};
      double sum = 0.0;
      for (const auto& pc : other_parent_pis[o].components()) sum += overlap_scale(factor, pc);
      factors.push_back(sum);
      ++o;
    }
    psi[j] = comp.weight * detail::stable_product(factors);
    if (psi[j] > 0.0) all_zero = false;
  }
  if (all_zero && !cpd.components.empty()) {
    std::vector<double> logs(cpd.components.size());
    for (std::size_t j = 0; j < cpd.components.size(); ++j) {
      const auto& comp = cpd.components[j];
      double lg = std::log(comp.weight);
      std::vector<double> child_terms;
      child_terms.reserve(lambda_mixture.size());
      const WeightedGaussian child_factor{1.0, comp.child_mean, comp.child_variance};
      for (const auto& lc : lambda_mixture.components()) {
        if (lc.weight == 0.0) continue;
        child_terms.push_back(log_overlap_scale(child_factor, lc));
      }
      lg += child_terms.empty() ? -std::numeric_limits<double>::infinity()
                                : detail::log_sum_exp(child_terms);
      for (std::size_t k = 0, o = 0; k < n; ++k) {
        if (k == target_index) continue;
        const WeightedGaussian factor{1.0, comp.parents[k].mean, comp.parents[k].variance};
        lg += log_mixture_overlap(factor, other_parent_pis[o]);
        ++o;
      }
      logs[j] = lg;
    }
    psi = rescale_from_logs(std::move(logs));
  }
  return psi;
}

Likelihood lambda_message_to_parent_mixture(const ConditionalMixtureCPD& cpd,
                                            const Likelihood& combined_lambda,
                                            std::span<const GaussianMixture> other_parent_pis,
                                            std::size_t target_index,
                                            const ReductionPolicy& policy) {
  if (combined_lambda.is_vacuous()) return Likelihood::vacuous();
  const std::vector<double> psi =
      lambda_component_weights(cpd, combined_lambda.mixture(), other_parent_pis, target_index);
  if (std::all_of(psi.begin(), psi.end(), [](double w) { return w == 0.0; }))
    throw Error(ErrorCode::EmptyLikelihood, "all diagnostic-message weights vanished");
  std::vector<WeightedGaussian> comps;
  comps.reserve(psi.size());
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const auto& f = cpd.components[j].parents[target_index];
    comps.push_back({psi[j], f.mean, f.variance});
  }
  GaussianMixture m = mixture_scale_max_to_one(mixture_from(std::move(comps)));
  m = mixture_reduce(m, policy).mixture;
  return Likelihood::from_mixture(mixture_scale_max_to_one(m));
}

Likelihood lambda_message_to_parent_linear(const LinearCPD& cpd,
                                           const Likelihood& combined_lambda,
                                           std::span<const GaussianMixture> other_parent_pis,
                                           std::size_t target_index,
                                           const ReductionPolicy& policy) {
  if (combined_lambda.is_vacuous()) return Likelihood::vacuous();
  const std::size_t n = cpd.coefficients.size();
  if (target_index >= n) throw Error(ErrorCode::InvalidArgument, "target parent index out of range");
  if (other_parent_pis.size() + 1 != n)
    throw Error(ErrorCode::ArityMismatch, "co-parent message count != arity - 1");

  const GaussianMixture& lm = combined_lambda.mixture();
  const double bi = cpd.coefficients[target_index];
  const std::size_t n_other = n - 1;

  std::vector<WeightedGaussian> comps;
  std::vector<std::size_t> idx(n_other, 0);
  std::vector<double> ws(n_other + 1);
  for (const auto& lc : lm.components()) {
    std::fill(idx.begin(), idx.end(), 0);
    for (;;) {
      double variance = cpd.noise_variance + lc.variance;
      double mean = lc.mean;
      ws[0] = lc.weight / std::abs(bi);
      for (std::size_t o = 0; o < n_other; ++o) {
        const std::size_t k = o < target_index ? o : o + 1;
        const double bk = cpd.coefficients[k];
        const auto& pc = other_parent_pis[o].components()[idx[o]];
        ws[o + 1] = pc.weight;
        variance += bk * bk * pc.variance;
        mean -= bk * pc.mean;
      }
      comps.push_back({detail::stable_product(ws), mean / bi, variance / (bi * bi)});
      std::size_t d = 0;
      while (d < n_other && ++idx[d] == other_parent_pis[d].size()) idx[d++] = 0;
      if (d == n_other || n_other == 0) break;
    }
  }
  GaussianMixture m = mixture_scale_max_to_one(mixture_from(std::move(comps)));
  m = mixture_reduce(m, policy).mixture;
  return Likelihood::from_mixture(mixture_scale_max_to_one(m));
}

namespace {

/// One full sweep over a validated network.
class Sweep {
 public:
  Sweep(const Network& net, const Evidence& evidence, const InferenceOptions& options)
      : net_(net), options_(options), node_pi_(net.node_count()), pi_ready_(net.node_count(), false),
        evidence_value_(net.node_count(), 0.0), is_evidence_(net.node_count(), false) {
    for (const auto& [id, value] : evidence.assignments) {
      if (!std::isfinite(value))
        throw Error(ErrorCode::InvalidArgument, "evidence value for '" + id + "' is not finite", id);
      const std::size_t i = net_.index_of(id);
      is_evidence_[i] = true;
      evidence_value_[i] = value;
    }
  }

  InferenceResult run() {
    const std::size_t n = net_.node_count();
    std::vector<std::size_t> tree_parent(n, kNone);
    std::vector<bool> seen(n, false);

    std::optional<std::size_t> pivot_override;
    if (options_.pivot_override) pivot_override = net_.index_of(*options_.pivot_override);

    for (std::size_t start = 0; start < n; ++start) {
      if (seen[start]) continue;
      // collect the component
      std::vector<std::size_t> comp;
      std::deque<std::size_t> queue{start};
      seen[start] = true;
      while (!queue.empty()) {
        const std::size_t u = queue.front();
        queue.pop_front();
        comp.push_back(u);
        for (std::size_t v : neighbors(u))
          if (!seen[v]) {
            seen[v] = true;
            queue.push_back(v);
          }
      }
      std::size_t pivot = *std::min_element(comp.begin(), comp.end(), [&](auto a, auto b) {
        return net_.node(a).id < net_.node(b).id;
      });
      if (pivot_override &&
          std::find(comp.begin(), comp.end(), *pivot_override) != comp.end())
        pivot = *pivot_override;

      // BFS order rooted at pivot
      std::vector<std::size_t> order;
      std::deque<std::size_t> q2{pivot};
      tree_parent[pivot] = kNone;
      std::vector<bool> visited(n, false);
      visited[pivot] = true;
      while (!q2.empty()) {
        const std::size_t u = q2.front();
        q2.pop_front();
        order.push_back(u);
        for (std::size_t v : neighbors(u))
          if (!visited[v]) {
            visited[v] = true;
            tree_parent[v] = u;
            q2.push_back(v);
          }
      }

      // collect toward the pivot, then distribute away from it
      for (auto it = order.rbegin(); it != order.rend(); ++it)
        if (tree_parent[*it] != kNone) send(*it, tree_parent[*it]);
      for (std::size_t u : order)
        for (std::size_t v : neighbors(u))
          if (v != tree_parent[u]) send(u, v);
    }

    InferenceResult result;
    for (std::size_t i = 0; i < n; ++i) {
      const NodeId& id = net_.node(i).id;
      try {
        if (is_evidence_[i]) {
          result.beliefs.emplace(id, GaussianMixture::dirac(evidence_value_[i]));
          result.diagnostics.emplace(id, NodeDiagnostics{1, 1});
          continue;
        }
        const GaussianMixture raw =
            compute_belief(pi_of(i), combine_lambda(child_lambdas(i), options_.reduction),
                           ReductionPolicy::identity());
        GaussianMixture reduced = mixture_reduce(raw, options_.reduction).mixture;
        result.diagnostics.emplace(id, NodeDiagnostics{raw.size(), reduced.size()});
        result.beliefs.emplace(id, std::move(reduced));
      } catch (const Error& e) {
        rethrow_as_contradiction(e, id);
      }
    }
    result.messages = std::move(messages_);
    return result;
  }

 private:
  std::vector<std::size_t> neighbors(std::size_t u) const {
    std::vector<std::size_t> out = net_.parents_of(u);
    const auto& ch = net_.children_of(u);
    out.insert(out.end(), ch.begin(), ch.end());
    return out;
  }

  [[noreturn]] static void rethrow_as_contradiction(const Error& e, const NodeId& id) {
    switch (e.code()) {
      case ErrorCode::EmptyLikelihood:
      case ErrorCode::EmptyMixture:
      case ErrorCode::NormalizationFailure:
        throw Error(ErrorCode::ContradictoryEvidence,
                    "evidence is contradictory at node '" + id + "' (" + e.what() + ")", id);
      default:
        throw;
    }
  }

  std::vector<Likelihood> child_lambdas(std::size_t u, std::size_t skip = kNone) const {
    std::vector<Likelihood> out;
    for (std::size_t c : net_.children_of(u)) {
      if (c == skip) continue;
      out.push_back(messages_.lambda.at({c, u}));
    }
    return out;
  }

  const GaussianMixture& pi_of(std::size_t u) {
    if (pi_ready_[u]) return *node_pi_[u];
    const NodeSpec& spec = net_.node(u);
    if (spec.is_root()) {
      node_pi_[u] = spec.prior();
    } else {
      std::vector<GaussianMixture> parent_msgs;
      parent_msgs.reserve(spec.parents.size());
      for (std::size_t p : net_.parents_of(u)) parent_msgs.push_back(messages_.pi.at({p, u}));
      if (std::holds_alternative<ConditionalMixtureCPD>(spec.model))
        node_pi_[u] = compute_pi_mixture(std::get<ConditionalMixtureCPD>(spec.model), parent_msgs,
                                         options_.reduction);
      else
        node_pi_[u] =
            compute_pi_linear(std::get<LinearCPD>(spec.model), parent_msgs, options_.reduction);
    }
    pi_ready_[u] = true;
    return *node_pi_[u];
  }

  void send(std::size_t from, std::size_t to) {
    const NodeSpec& spec = net_.node(from);
    try {
      const auto& children = net_.children_of(from);
      if (std::find(children.begin(), children.end(), to) != children.end()) {
        // causal message to a child
        GaussianMixture msg = [&] {
          if (is_evidence_[from]) return GaussianMixture::dirac(evidence_value_[from]);
          return compute_belief(pi_of(from), combine_lambda(child_lambdas(from, to),
                                                            options_.reduction),
                                options_.reduction);
        }();
        messages_.pi.emplace(std::make_pair(from, to), std::move(msg));
        return;
      }
      // diagnostic message to a parent
      const Likelihood combined =
          is_evidence_[from]
              ? Likelihood::from_mixture(GaussianMixture::dirac(evidence_value_[from]))
              : combine_lambda(child_lambdas(from), options_.reduction);
      const auto& parents = net_.parents_of(from);
      const std::size_t i =
          static_cast<std::size_t>(std::find(parents.begin(), parents.end(), to) - parents.begin());
      std::vector<GaussianMixture> others;
      others.reserve(parents.size() - 1);
      for (std::size_t k = 0; k < parents.size(); ++k)
        if (k != i) others.push_back(messages_.pi.at({parents[k], from}));
      Likelihood msg =
          std::holds_alternative<ConditionalMixtureCPD>(spec.model)
              ? lambda_message_to_parent_mixture(std::get<ConditionalMixtureCPD>(spec.model),
                                                 combined, others, i, options_.reduction)
              : lambda_message_to_parent_linear(std::get<LinearCPD>(spec.model), combined, others,
                                                i, options_.reduction);
      messages_.lambda.emplace(std::make_pair(from, to), std::move(msg));
    } catch (const Error& e) {
      rethrow_as_contradiction(e, spec.id);
    }
  }

  const Network& net_;
  const InferenceOptions& options_;
  EdgeMessages messages_;
  std::vector<std::optional<GaussianMixture>> node_pi_;
  std::vector<bool> pi_ready_;
  std::vector<double> evidence_value_;
  std::vector<bool> is_evidence_;
};

}  // namespace

InferenceResult propagate(const Network& net, const Evidence& evidence,
                          const InferenceOptions& options) {
  return Sweep(net, evidence, options).run();
}

}  // namespace gsbp
