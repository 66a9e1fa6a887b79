#include "gsbp/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gsbp {

namespace {

void check_mixture_cpd(const NodeSpec& spec) {
  const auto& cpd = std::get<ConditionalMixtureCPD>(spec.model);
  if (cpd.components.empty())
    throw Error(ErrorCode::InvalidArgument, "conditional needs >= 1 component", spec.id);
  for (const auto& c : cpd.components) {
    if (!(c.weight >= 0.0) || !std::isfinite(c.weight))
      throw Error(ErrorCode::InvalidArgument, "conditional weight must be >= 0", spec.id);
    if (!(c.child_variance > 0.0))
      throw Error(ErrorCode::InvalidVariance, "conditional child variance must be > 0", spec.id);
    if (c.parents.size() != spec.parents.size())
      throw Error(ErrorCode::ArityMismatch, "component parent-factor count != parent count",
                  spec.id);
    for (const auto& f : c.parents)
      if (!(f.variance > 0.0))
        throw Error(ErrorCode::InvalidVariance, "conditional factor variance must be > 0",
                    spec.id);
  }
}

void check_linear_cpd(const NodeSpec& spec) {
  const auto& cpd = std::get<LinearCPD>(spec.model);
  if (cpd.coefficients.size() != spec.parents.size())
    throw Error(ErrorCode::ArityMismatch, "coefficient count != parent count", spec.id);
  for (double b : cpd.coefficients)
    if (b == 0.0 || !std::isfinite(b))
      throw Error(ErrorCode::InvalidArgument, "linear coefficients must be nonzero", spec.id);
  if (!(cpd.noise_variance > 0.0))
    throw Error(ErrorCode::InvalidVariance, "noise variance must be > 0", spec.id);
}

// union-find over node indices
struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

}  // namespace

std::size_t Network::index_of(const NodeId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error(ErrorCode::UnknownNode, "no node named '" + id + "'", id);
  return it->second;
}

std::size_t Network::edge_count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : parent_idx_) n += p.size();
  return n;
}

void validate_polytree(std::span<const NodeSpec> specs) {
  std::map<NodeId, std::size_t> index;
  for (std::size_t i = 0; i < specs.size(); ++i) index.emplace(specs[i].id, i);

  // directed acyclicity by Kahn's algorithm
  std::vector<std::size_t> indegree(specs.size(), 0);
  std::vector<std::vector<std::size_t>> children(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    for (const auto& pid : specs[i].parents) {
      auto it = index.find(pid);
      if (it == index.end())
        throw Error(ErrorCode::UnknownParent, "parent '" + pid + "' of '" + specs[i].id + "'",
                    specs[i].id);
      children[it->second].push_back(i);
      ++indegree[i];
    }
  }
  std::vector<std::size_t> ready;
  for (std::size_t i = 0; i < specs.size(); ++i)
    if (indegree[i] == 0) ready.push_back(i);
  std::size_t visited = 0;
  while (!ready.empty()) {
    const std::size_t u = ready.back();
    ready.pop_back();
    ++visited;
    for (std::size_t c : children[u])
      if (--indegree[c] == 0) ready.push_back(c);
  }
  if (visited != specs.size())
    throw Error(ErrorCode::DirectedCycle, "directed edges contain a cycle");

  // undirected skeleton must be a forest
  DisjointSet ds(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    for (const auto& pid : specs[i].parents) {
      const std::size_t p = index.at(pid);
      if (!ds.unite(p, i))
        throw Error(ErrorCode::UndirectedCycle,
                    "more than one path connects '" + pid + "' and '" + specs[i].id + "'",
                    specs[i].id);
    }
  }
}

void validate_polytree(const Network& net) { validate_polytree(net.nodes()); }

Network build_network(std::vector<NodeSpec> specs) {
  if (specs.empty()) throw Error(ErrorCode::InvalidArgument, "network needs >= 1 node");

  Network net;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].id.empty()) throw Error(ErrorCode::InvalidArgument, "empty node id");
    if (!net.index_.emplace(specs[i].id, i).second)
      throw Error(ErrorCode::DuplicateNodeId, "duplicate node '" + specs[i].id + "'", specs[i].id);
  }

  for (auto& spec : specs) {
    if (spec.is_root()) {
      if (!spec.has_prior())
        throw Error(ErrorCode::RootWithoutPrior, "root '" + spec.id + "' needs a prior", spec.id);
      const GaussianMixture& prior = spec.prior();
      if (!prior.normalized()) spec.model = mixture_normalize(prior);
    } else {
      if (spec.has_prior())
        throw Error(ErrorCode::PriorWithParents, "'" + spec.id + "' has both a prior and parents",
                    spec.id);
      if (std::holds_alternative<ConditionalMixtureCPD>(spec.model))
        check_mixture_cpd(spec);
      else
        check_linear_cpd(spec);
    }
    std::vector<NodeId> sorted_parents = spec.parents;
    std::sort(sorted_parents.begin(), sorted_parents.end());
    if (std::adjacent_find(sorted_parents.begin(), sorted_parents.end()) != sorted_parents.end())
      throw Error(ErrorCode::UndirectedCycle, "duplicate parent on '" + spec.id + "'", spec.id);
  }

  validate_polytree(specs);

  net.nodes_ = std::move(specs);
  net.parent_idx_.resize(net.nodes_.size());
  net.child_idx_.resize(net.nodes_.size());
  for (std::size_t i = 0; i < net.nodes_.size(); ++i) {
    for (const auto& pid : net.nodes_[i].parents) {
      const std::size_t p = net.index_.at(pid);
      net.parent_idx_[i].push_back(p);
      net.child_idx_[p].push_back(i);
    }
  }
  return net;
}

}  // namespace gsbp
