#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gsbp/fitting.hpp"
#include "gsbp/network.hpp"
#include "gsbp/propagation.hpp"

namespace gsbp::tools {

/// The bundled two-parent sum experiment: X and Y carry 20-component grid
/// fits of the unit uniform, Z = X + Y + noise with noise variance 0.01.
Network example_sum_network();

/// The prior fit both roots of the example network share.
FitReport example_prior_fit(int refine_steps = 0);

struct ExampleMetrics {
  std::vector<std::pair<std::string, double>> values;
  void add(std::string name, double value) { values.emplace_back(std::move(name), value); }
};

/// Runs the three example scenarios (no evidence; X = 1; Z = 2), writes one
/// node,x,density CSV per figure into out_dir, and returns the metric rows
/// the command prints.
ExampleMetrics run_example_scenarios(const std::string& out_dir);

// closed-form references used by the metric rows
double triangle_convolved_density(double z, double noise_std);
double uniform12_convolved_density(double z, double noise_std);

}  // namespace gsbp::tools
