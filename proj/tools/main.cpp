#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "example_scenarios.hpp"
#include "gsbp/document.hpp"
#include "gsbp/fitting.hpp"
#include "gsbp/propagation.hpp"

namespace {

using namespace gsbp;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitContradiction = 3;

struct GridSpec {
  double lo = 0.0, hi = 1.0;
  int n = 201;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) parts.push_back(item);
  return parts;
}

double parse_number(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, "bad number '" + s + "' in " + what);
  }
}

GridSpec parse_grid(const std::string& s) {
  const auto parts = split(s, ':');
  if (parts.size() != 3) throw Error(ErrorCode::ParseError, "--grid expects lo:hi:n");
  GridSpec g;
  g.lo = parse_number(parts[0], "--grid");
  g.hi = parse_number(parts[1], "--grid");
  g.n = static_cast<int>(parse_number(parts[2], "--grid"));
  if (!(g.lo < g.hi) || g.n < 2) throw Error(ErrorCode::ParseError, "--grid needs lo < hi, n >= 2");
  return g;
}

TargetDensity parse_target(const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts.empty()) throw Error(ErrorCode::InvalidTarget, "empty --target");
  const std::string& kind = parts[0];
  if (kind == "uniform" && parts.size() == 3)
    return TargetDensity::uniform(parse_number(parts[1], spec), parse_number(parts[2], spec));
  if (kind == "triangular" && parts.size() == 4)
    return TargetDensity::triangular(parse_number(parts[1], spec), parse_number(parts[2], spec),
                                     parse_number(parts[3], spec));
  if (kind == "gaussian" && parts.size() == 3)
    return TargetDensity::gaussian_mixture(GaussianMixture::single(
        1.0, parse_number(parts[1], spec), parse_number(parts[2], spec)));
  if (kind == "tabulated" && parts.size() == 2) {
    std::ifstream in(parts[1]);
    if (!in) throw Error(ErrorCode::InvalidTarget, "cannot open '" + parts[1] + "'");
    std::vector<double> xs, ys;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      const auto cols = split(line, ',');
      if (cols.size() != 2)
        throw Error(ErrorCode::InvalidTarget, "tabulated rows are 'x,y': " + line);
      xs.push_back(parse_number(cols[0], "tabulated file"));
      ys.push_back(parse_number(cols[1], "tabulated file"));
    }
    return TargetDensity::tabulated(std::move(xs), std::move(ys));
  }
  throw Error(ErrorCode::InvalidTarget,
              "expected uniform:LO:HI, triangular:LO:MODE:HI, gaussian:MEAN:VAR or tabulated:PATH");
}

int cmd_validate(const std::string& path) {
  const Network net = load_network_file(path);
  std::cout << net.node_count() << " nodes, " << net.edge_count() << " edges, polytree: ok\n";
  return kExitOk;
}

int cmd_infer(const std::string& path, const std::vector<std::string>& evidence_flags,
              const std::vector<std::string>& query_flags, const std::optional<std::string>& grid,
              double prune_eps, std::size_t max_components) {
  const Network net = load_network_file(path);

  Evidence evidence;
  for (const auto& flag : evidence_flags) {
    const auto eq = flag.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ParseError, "--evidence expects NODE=VALUE, got '" + flag + "'");
    const std::string name = flag.substr(0, eq);
    net.index_of(name);  // throws UnknownNode
    evidence.assignments[name] = parse_number(flag.substr(eq + 1), "--evidence");
  }

  std::vector<std::string> queries = query_flags;
  if (queries.empty())
    for (const auto& spec : net.nodes()) queries.push_back(spec.id);
  for (const auto& q : queries) net.index_of(q);

  InferenceOptions options;
  options.reduction.prune_epsilon = prune_eps;
  options.reduction.max_components = max_components;
  const InferenceResult result = propagate(net, evidence, options);

  std::optional<GridSpec> fixed_grid;
  if (grid) fixed_grid = parse_grid(*grid);

  std::cout << "node,x,density\n";
  for (const auto& name : queries) {
    const GaussianMixture& belief = result.beliefs.at(name);
    if (belief.is_single_dirac()) {
      std::cout << name << ',' << format_double(belief[0].mean) << ",DIRAC\n";
      std::cerr << name << ": mean=" << format_double(belief[0].mean)
                << " variance=0 components=1\n";
      continue;
    }
    const Moments mom = mixture_moments(belief);
    GridSpec g;
    if (fixed_grid) {
      g = *fixed_grid;
    } else {
      const double sigma = std::sqrt(mom.variance);
      g = {mom.mean - 5.0 * sigma, mom.mean + 5.0 * sigma, 201};
    }
    for (int i = 0; i < g.n; ++i) {
      const double x = g.lo + i * (g.hi - g.lo) / (g.n - 1);
      std::cout << name << ',' << format_double(x) << ',' << format_double(belief.eval(x)) << '\n';
    }
    std::cerr << name << ": mean=" << format_double(mom.mean)
              << " variance=" << format_double(mom.variance) << " components=" << belief.size()
              << '\n';
  }
  return kExitOk;
}

int cmd_fit(const std::string& target_spec, int m_components,
            const std::optional<std::string>& support, int refine_steps, double step_size,
            const std::optional<std::string>& var_rule, int quadrature_points) {
  const TargetDensity target = parse_target(target_spec);

  FitConfig config;
  config.n_components = m_components;
  config.refine_steps = refine_steps;
  config.step_size = step_size;
  config.quadrature_points = quadrature_points;
  if (support) {
    const auto parts = split(*support, ':');
    if (parts.size() != 2) throw Error(ErrorCode::ParseError, "--support expects lo:hi");
    config.lo = parse_number(parts[0], "--support");
    config.hi = parse_number(parts[1], "--support");
  } else {
    config.lo = target.support_lo();
    config.hi = target.support_hi();
  }

  if (var_rule) {
    const auto parts = split(*var_rule, ':');
    if (parts.size() == 2 && parts[0] == "spacing")
      config.variance_rule = VarianceRule::spacing(parse_number(parts[1], "--var-rule"));
    else if (parts.size() == 2 && parts[0] == "shared")
      config.variance_rule = VarianceRule::shared(parse_number(parts[1], "--var-rule"));
    else
      throw Error(ErrorCode::ParseError, "--var-rule expects spacing:C or shared:S");
  } else if (target.is_gaussian_mixture()) {
    // a Gaussian target fixes its own natural component scale
    const GaussianMixture& gm = target.as_gaussian_mixture();
    double variance = 0.0;
    for (const auto& c : gm.components()) variance += c.weight * c.variance;
    config.variance_rule = VarianceRule::shared(variance);
  }

  const FitReport report = uniform_grid_fit(target, config);
  std::cout << "l1,l2,iterations\n"
            << format_double(report.l1_error) << ',' << format_double(report.l2_error) << ','
            << report.iterations_used << '\n'
            << serialize_mixture(report.mixture) << '\n';
  return kExitOk;
}

int cmd_example(const std::string& out_dir) {
  const tools::ExampleMetrics metrics = tools::run_example_scenarios(out_dir);
  std::cout << "metric,value\n";
  for (const auto& [name, value] : metrics.values)
    std::cout << name << ',' << format_double(value) << '\n';
  std::cerr << "wrote prior_xy.csv, z_no_evidence.csv, z_evidence_x1.csv, xy_evidence_z2.csv to "
            << out_dir << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Belief propagation over polytrees of continuous variables, with every density "
               "represented as a weighted sum of Gaussians"};
  app.require_subcommand(1);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a network document");
  validate->add_option("file", validate_path, "JSON network document")->required();

  std::string infer_path;
  std::vector<std::string> evidence_flags, query_flags;
  std::optional<std::string> grid_flag;
  double prune_eps = 1e-9;
  std::size_t max_components = 512;
  auto* infer = app.add_subcommand("infer", "Compute posterior densities");
  infer->add_option("file", infer_path, "JSON network document")->required();
  infer->add_option("--evidence", evidence_flags, "NODE=VALUE, repeatable");
  infer->add_option("--query", query_flags, "node to report (default: all)");
  infer->add_option("--grid", grid_flag, "lo:hi:n output grid (default: mean +/- 5 sigma, 201)");
  infer->add_option("--prune-eps", prune_eps, "reduction prune threshold");
  infer->add_option("--max-components", max_components, "reduction component cap");

  std::string target_spec;
  int m_components = 20;
  std::optional<std::string> support_flag, var_rule_flag;
  int refine_steps = 0, quadrature_points = 2001;
  double step_size = 0.5;
  auto* fit = app.add_subcommand("fit", "Fit a Gaussian sum to a density");
  fit->add_option("--target", target_spec,
                  "uniform:LO:HI | triangular:LO:MODE:HI | gaussian:MEAN:VAR | tabulated:PATH")
      ->required();
  fit->add_option("--M", m_components, "number of components")->required();
  fit->add_option("--support", support_flag, "lo:hi mean-grid span (default: target support)");
  fit->add_option("--refine", refine_steps, "gradient-descent steps on the weights");
  fit->add_option("--step", step_size, "initial descent step size");
  fit->add_option("--var-rule", var_rule_flag, "spacing:C or shared:S component variance");
  fit->add_option("--points", quadrature_points, "quadrature points for errors/objective");

  std::string out_dir = "example_out";
  auto* example = app.add_subcommand("example", "Run the bundled two-parent sum experiment");
  example->add_option("--out", out_dir, "output directory for the CSV curves");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (validate->parsed()) return cmd_validate(validate_path);
    if (infer->parsed())
      return cmd_infer(infer_path, evidence_flags, query_flags, grid_flag, prune_eps,
                       max_components);
    if (fit->parsed())
      return cmd_fit(target_spec, m_components, support_flag, refine_steps, step_size,
                     var_rule_flag, quadrature_points);
    if (example->parsed()) return cmd_example(out_dir);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::ContradictoryEvidence ? kExitContradiction : kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
