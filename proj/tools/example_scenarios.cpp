#include "example_scenarios.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "gsbp/document.hpp"

namespace gsbp::tools {

namespace {

constexpr double kNoiseVariance = 0.01;
constexpr int kGridPoints = 501;
constexpr double kGridLo = -0.25;
constexpr double kGridHi = 2.25;

double std_normal_cdf(double u) { return 0.5 * std::erfc(-u / std::numbers::sqrt2); }

double normal_density(double x, double sigma) {
  return std::exp(-x * x / (2.0 * sigma * sigma)) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

// integral over [a, b] of t * N(z - t; sigma^2, 0) dt
double first_moment_segment(double a, double b, double z, double sigma) {
  const double l = a - z, u = b - z;
  return z * (std_normal_cdf(u / sigma) - std_normal_cdf(l / sigma)) +
         sigma * sigma * (normal_density(l, sigma) - normal_density(u, sigma));
}

// integral over [a, b] of N(z - t; sigma^2, 0) dt
double mass_segment(double a, double b, double z, double sigma) {
  return std_normal_cdf((b - z) / sigma) - std_normal_cdf((a - z) / sigma);
}

std::vector<double> make_grid(double lo, double hi, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = lo + i * (hi - lo) / (n - 1);
  return g;
}

double trapezoid_l1(std::span<const double> grid, std::span<const double> a,
                    std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double d0 = std::abs(a[i] - b[i]);
    const double d1 = std::abs(a[i + 1] - b[i + 1]);
    acc += 0.5 * (d0 + d1) * (grid[i + 1] - grid[i]);
  }
  return acc;
}

void write_csv(const std::string& path,
               const std::vector<std::pair<std::string, const GaussianMixture*>>& curves,
               std::span<const double> grid) {
  std::ofstream out(path, std::ios::binary);
  out << "node,x,density\n";
  for (const auto& [name, mixture] : curves) {
    const std::vector<double> values = mixture_eval_grid(*mixture, grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
      out << name << ',' << format_double(grid[i]) << ',' << format_double(values[i]) << '\n';
  }
}

bool bitwise_equal(const GaussianMixture& a, const GaussianMixture& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].weight != b[i].weight || a[i].mean != b[i].mean || a[i].variance != b[i].variance)
      return false;
  return true;
}

}  // namespace

double triangle_convolved_density(double z, double noise_std) {
  // triangle on [0, 2] with peak 1 at z = 1, smoothed by the noise
  return first_moment_segment(0.0, 1.0, z, noise_std) +
         2.0 * mass_segment(1.0, 2.0, z, noise_std) -
         first_moment_segment(1.0, 2.0, z, noise_std);
}

double uniform12_convolved_density(double z, double noise_std) {
  return mass_segment(1.0, 2.0, z, noise_std);
}

FitReport example_prior_fit(int refine_steps) {
  FitConfig config;
  config.n_components = 20;
  config.lo = 0.0;
  config.hi = 1.0;
  config.refine_steps = refine_steps;
  return uniform_grid_fit(TargetDensity::uniform(0.0, 1.0), config);
}

Network example_sum_network() {
  const GaussianMixture prior = example_prior_fit().mixture;
  std::vector<NodeSpec> specs;
  specs.push_back({"X", {}, prior});
  specs.push_back({"Y", {}, prior});
  specs.push_back({"Z", {"X", "Y"}, LinearCPD{{1.0, 1.0}, kNoiseVariance}});
  return build_network(std::move(specs));
}

ExampleMetrics run_example_scenarios(const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::vector<double> grid = make_grid(kGridLo, kGridHi, kGridPoints);
  const double noise_std = std::sqrt(kNoiseVariance);

  ExampleMetrics metrics;
  const FitReport raw_fit = example_prior_fit();
  const FitReport refined_fit = example_prior_fit(300);
  metrics.add("prior_fit_l1", raw_fit.l1_error);
  metrics.add("prior_fit_l1_raw_wide", fit_error(raw_fit.mixture, TargetDensity::uniform(0, 1),
                                                 -0.25, 1.25, 2001).first);
  metrics.add("prior_fit_l1_refined_wide",
              fit_error(refined_fit.mixture, TargetDensity::uniform(0, 1), -0.25, 1.25, 2001).first);

  const Network net = example_sum_network();
  const GaussianMixture& prior_x = net.node(net.index_of("X")).prior();

  write_csv(out_dir + "/prior_xy.csv", {{"X", &prior_x}, {"Y", &prior_x}}, grid);

  // scenario 1: no evidence
  const InferenceResult no_evidence = propagate(net, {});
  const GaussianMixture& bel_z = no_evidence.beliefs.at("Z");
  write_csv(out_dir + "/z_no_evidence.csv", {{"Z", &bel_z}}, grid);
  {
    const std::vector<double> values = mixture_eval_grid(bel_z, grid);
    std::vector<double> oracle(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
      oracle[i] = triangle_convolved_density(grid[i], noise_std);
    metrics.add("z_noevidence_l1_vs_triangle", trapezoid_l1(grid, values, oracle));
  }

  // scenario 2: X = 1
  const InferenceResult given_x = propagate(net, Evidence{{{"X", 1.0}}});
  const GaussianMixture& bel_z_x1 = given_x.beliefs.at("Z");
  write_csv(out_dir + "/z_evidence_x1.csv", {{"Z", &bel_z_x1}}, grid);
  {
    const std::vector<double> values = mixture_eval_grid(bel_z_x1, grid);
    std::vector<double> oracle(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
      oracle[i] = uniform12_convolved_density(grid[i], noise_std);
    metrics.add("z_x1_l1_vs_uniform12", trapezoid_l1(grid, values, oracle));
    metrics.add("y_unchanged_under_x1",
                bitwise_equal(given_x.beliefs.at("Y"), prior_x) ? 1.0 : 0.0);
  }

  // scenario 3: Z = 2
  const InferenceResult given_z = propagate(net, Evidence{{{"Z", 2.0}}});
  const GaussianMixture& bel_x_z2 = given_z.beliefs.at("X");
  const GaussianMixture& bel_y_z2 = given_z.beliefs.at("Y");
  write_csv(out_dir + "/xy_evidence_z2.csv", {{"X", &bel_x_z2}, {"Y", &bel_y_z2}}, grid);
  {
    const Moments mom = mixture_moments(bel_x_z2);
    metrics.add("x_z2_posterior_mean", mom.mean);
    metrics.add("x_z2_posterior_std", std::sqrt(mom.variance));

    // reference posterior from the exact uniform priors
    const std::vector<double> xg = make_grid(-0.25, 1.25, 2001);
    std::vector<double> oracle(xg.size(), 0.0);
    for (std::size_t i = 0; i < xg.size(); ++i) {
      const double x = xg[i];
      if (x < 0.0 || x > 1.0) continue;
      oracle[i] = mass_segment(0.0, 1.0, 2.0 - x, noise_std);  // integral over y in [0,1]
    }
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < xg.size(); ++i)
      mass += 0.5 * (oracle[i] + oracle[i + 1]) * (xg[i + 1] - xg[i]);
    for (auto& v : oracle) v /= mass;
    const std::vector<double> values = mixture_eval_grid(bel_x_z2, xg);
    metrics.add("x_z2_l1_vs_quadrature", trapezoid_l1(xg, values, oracle));
  }
  return metrics;
}

}  // namespace gsbp::tools
