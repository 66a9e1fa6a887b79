#pragma once

#include <string>
#include <vector>

#include "gsbp/network.hpp"

namespace gsbp {

/// Parses the JSON network document: a top-level `nodes` array where each
/// entry carries `id`, optional `parents`, and exactly one of `prior`
/// (array of {w, mean, var}), `linear_cpd` ({coeffs, noise_var}) or
/// `mixture_cpd` (array of {w, child_mean, child_var, parents: [{mean,
/// var}, ...]}). Throws ParseError with a line:column location on malformed
/// input.
std::vector<NodeSpec> parse_network_document(const std::string& text);

/// parse + build in one step.
Network load_network(const std::string& text);
Network load_network_file(const std::string& path);

/// Serializes with 17 significant digits so doubles round-trip exactly.
std::string serialize_network(const Network& net);

/// The `prior` fragment alone, pasteable into a node entry.
std::string serialize_mixture(const GaussianMixture& m);

/// 17-significant-digit number formatting shared by every emitter.
std::string format_double(double v);

}  // namespace gsbp
