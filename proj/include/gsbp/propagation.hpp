#pragma once

#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gsbp/gaussian.hpp"
#include "gsbp/network.hpp"

namespace gsbp {

struct InferenceOptions {
  ReductionPolicy reduction{1e-9, 512};
  /// Testing hook: overrides the default sweep pivot (lowest node id).
  /// Beliefs are pivot-independent; this exists to prove it.
  std::optional<NodeId> pivot_override;
};

/// Every edge message of one sweep, keyed (sender index, receiver index).
struct EdgeMessages {
  std::map<std::pair<std::size_t, std::size_t>, GaussianMixture> pi;
  std::map<std::pair<std::size_t, std::size_t>, Likelihood> lambda;
};

struct NodeDiagnostics {
  std::size_t belief_components_before = 0;
  std::size_t belief_components_after = 0;
};

struct InferenceResult {
  /// Normalized posterior per node; an evidence node reports its Dirac.
  std::map<NodeId, GaussianMixture> beliefs;
  std::map<NodeId, NodeDiagnostics> diagnostics;
  EdgeMessages messages;
};

/// Product of the incoming child messages. Vacuous entries drop out; an
/// empty or all-vacuous list is vacuous; a single survivor passes through
/// unchanged; two or more are folded pairwise with `policy` applied between
/// folds, then rescaled max-weight-to-1.
Likelihood combine_lambda(std::span<const Likelihood> children_msgs,
                          const ReductionPolicy& policy = ReductionPolicy::identity());

/// Raw predictive-mixture weights for a separable conditional: entry j is
/// the j-th component weight times the product over parents of the
/// mixture-overlap sums. Computed in the factorized per-parent form.
std::vector<double> pi_component_weights(const ConditionalMixtureCPD& cpd,
                                         std::span<const GaussianMixture> parent_pis);

/// Predictive density through a separable conditional given the parents'
/// pi-messages; normalized, then reduced.
GaussianMixture compute_pi_mixture(const ConditionalMixtureCPD& cpd,
                                   std::span<const GaussianMixture> parent_pis,
                                   const ReductionPolicy& policy = ReductionPolicy::identity());

/// Exact predictive density through a linear conditional: one component per
/// parent-component tuple; normalized, then reduced.
GaussianMixture compute_pi_linear(const LinearCPD& cpd,
                                  std::span<const GaussianMixture> parent_pis,
                                  const ReductionPolicy& policy = ReductionPolicy::identity());

/// Posterior from the causal and diagnostic parts: pi when lambda is
/// vacuous, otherwise the normalized mixture product, reduced.
GaussianMixture compute_belief(const GaussianMixture& pi, const Likelihood& lambda,
                               const ReductionPolicy& policy = ReductionPolicy::identity());

/// Message to child `target_index`: the belief recomputed with that child's
/// lambda replaced by the vacuous function.
GaussianMixture pi_message_to_child(const GaussianMixture& pi,
                                    std::span<const Likelihood> child_lambdas,
                                    std::size_t target_index,
                                    const ReductionPolicy& policy = ReductionPolicy::identity());

/// Raw diagnostic-message weights for a separable conditional: entry j
/// couples the child factor to the combined lambda and every non-target
/// parent factor to that parent's pi, in the factorized per-parent form.
std::vector<double> lambda_component_weights(const ConditionalMixtureCPD& cpd,
                                             const GaussianMixture& lambda_mixture,
                                             std::span<const GaussianMixture> other_parent_pis,
                                             std::size_t target_index);

/// Message to parent `target_index` through a separable conditional.
/// Vacuous in, vacuous out (evidence below is absent); otherwise a mixture
/// over the target parent's factors, max-weight-to-1, reduced.
Likelihood lambda_message_to_parent_mixture(
    const ConditionalMixtureCPD& cpd, const Likelihood& combined_lambda,
    std::span<const GaussianMixture> other_parent_pis, std::size_t target_index,
    const ReductionPolicy& policy = ReductionPolicy::identity());

/// Exact linear-conditional counterpart of the above.
Likelihood lambda_message_to_parent_linear(
    const LinearCPD& cpd, const Likelihood& combined_lambda,
    std::span<const GaussianMixture> other_parent_pis, std::size_t target_index,
    const ReductionPolicy& policy = ReductionPolicy::identity());

/// Full two-phase sweep (collect toward a pivot, then distribute) per
/// connected component; every edge message is computed exactly once.
/// Surfaces empty likelihoods and failed normalizations as
/// ContradictoryEvidence naming the node being updated.
InferenceResult propagate(const Network& net, const Evidence& evidence,
                          const InferenceOptions& options = {});

}  // namespace gsbp
