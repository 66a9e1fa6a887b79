#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gsbp/gaussian.hpp"

namespace gsbp {

using NodeId = std::string;

/// One separable factor of a conditional component: N(u_i; variance, mean).
struct CpdFactor {
  double mean = 0.0;
  double variance = 1.0;
};

/// One term of the separable-product conditional representation:
/// weight * N(x; child_variance, child_mean) * prod_i N(u_i; ., .).
/// Factor variances may differ; a single shared variance per component is
/// the special case.
struct CpdComponent {
  double weight = 1.0;
  double child_mean = 0.0;
  double child_variance = 1.0;
  std::vector<CpdFactor> parents;
};

struct ConditionalMixtureCPD {
  std::vector<CpdComponent> components;

  std::size_t parent_count() const {
    return components.empty() ? 0 : components.front().parents.size();
  }
};

/// x = sum_i b_i * u_i + noise, noise ~ N(0, noise_variance).
struct LinearCPD {
  std::vector<double> coefficients;
  double noise_variance = 1.0;
};

struct NodeSpec {
  NodeId id;
  std::vector<NodeId> parents;
  /// Root nodes carry a prior mixture; others one of the two conditionals.
  std::variant<LinearCPD, GaussianMixture, ConditionalMixtureCPD> model;

  bool is_root() const noexcept { return parents.empty(); }
  bool has_prior() const noexcept { return std::holds_alternative<GaussianMixture>(model); }
  const GaussianMixture& prior() const { return std::get<GaussianMixture>(model); }
};

/// Per-query assignment of observed values.
struct Evidence {
  std::map<NodeId, double> assignments;
};

/// Validated polytree (forest allowed). Immutable after build; shareable
/// across threads.
class Network {
 public:
  std::size_t node_count() const noexcept { return nodes_.size(); }
  const NodeSpec& node(std::size_t i) const { return nodes_[i]; }
  const std::vector<NodeSpec>& nodes() const noexcept { return nodes_; }

  std::size_t index_of(const NodeId& id) const;  // throws UnknownNode
  bool contains(const NodeId& id) const noexcept { return index_.count(id) != 0; }

  const std::vector<std::size_t>& parents_of(std::size_t i) const { return parent_idx_[i]; }
  const std::vector<std::size_t>& children_of(std::size_t i) const { return child_idx_[i]; }
  std::size_t edge_count() const noexcept;

 private:
  friend Network build_network(std::vector<NodeSpec> specs);

  std::vector<NodeSpec> nodes_;
  std::map<NodeId, std::size_t> index_;
  std::vector<std::vector<std::size_t>> parent_idx_;
  std::vector<std::vector<std::size_t>> child_idx_;
};

/// Structural validation + adjacency construction + polytree check.
/// Priors slightly off unit mass (beyond 1e-12) are renormalized.
Network build_network(std::vector<NodeSpec> specs);

/// Succeeds iff directed edges are acyclic and the undirected skeleton is a
/// forest. build_network runs this before returning.
void validate_polytree(std::span<const NodeSpec> specs);
void validate_polytree(const Network& net);

}  // namespace gsbp
