#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gsbp/document.hpp"
#include "gsbp/fitting.hpp"
#include "gsbp/gaussian.hpp"
#include "gsbp/network.hpp"
#include "gsbp/propagation.hpp"

namespace py = pybind11;
using namespace gsbp;

namespace {

GaussianMixture mixture_from_triples(const std::vector<std::tuple<double, double, double>>& t) {
  std::vector<WeightedGaussian> comps;
  comps.reserve(t.size());
  for (const auto& [w, mean, var] : t) comps.push_back({w, mean, var});
  return GaussianMixture(std::move(comps));
}

ReductionPolicy make_policy(double prune_eps, std::size_t max_components) {
  ReductionPolicy p;
  p.prune_epsilon = prune_eps;
  p.max_components = max_components == 0 ? ReductionPolicy::unbounded() : max_components;
  return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Belief propagation on polytrees of continuous variables, with priors, "
            "conditionals, messages and posteriors all represented as weighted sums "
            "of Gaussians.";

  py::register_exception<Error>(m, "GsbpError");

  py::class_<WeightedGaussian>(m, "WeightedGaussian")
      .def(py::init([](double weight, double mean, double variance) {
             return WeightedGaussian{weight, mean, variance};
           }),
           py::arg("weight"), py::arg("mean"), py::arg("variance"))
      .def_readonly("weight", &WeightedGaussian::weight)
      .def_readonly("mean", &WeightedGaussian::mean)
      .def_readonly("variance", &WeightedGaussian::variance)
      .def("is_dirac", &WeightedGaussian::is_dirac)
      .def("__repr__", [](const WeightedGaussian& g) {
        return "WeightedGaussian(weight=" + format_double(g.weight) +
               ", mean=" + format_double(g.mean) + ", variance=" + format_double(g.variance) + ")";
      });

  py::class_<GaussianMixture>(m, "GaussianMixture")
      .def(py::init(&mixture_from_triples), py::arg("components"),
           "components: list of (weight, mean, variance) triples")
      .def_static("dirac", &GaussianMixture::dirac, py::arg("x0"))
      .def("components", [](const GaussianMixture& m_) { return m_.components(); })
      .def("__len__", &GaussianMixture::size)
      .def("normalized", &GaussianMixture::normalized)
      .def("has_dirac", &GaussianMixture::has_dirac)
      .def("is_single_dirac", &GaussianMixture::is_single_dirac)
      .def("total_weight", &GaussianMixture::total_weight)
      .def("eval", &GaussianMixture::eval, py::arg("x"))
      .def("eval_grid",
           [](const GaussianMixture& m_, const std::vector<double>& grid) {
             return mixture_eval_grid(m_, grid);
           },
           py::arg("grid"))
      .def("moments",
           [](const GaussianMixture& m_) {
             const Moments mom = mixture_moments(m_);
             return py::make_tuple(mom.mean, mom.variance);
           })
      .def("__repr__", [](const GaussianMixture& m_) {
        return "GaussianMixture(" + std::to_string(m_.size()) + " components)";
      });

  m.def("eval_gaussian", &eval_gaussian, py::arg("x"), py::arg("mean"), py::arg("variance"));
  m.def("product_pair",
        [](const WeightedGaussian& a, const WeightedGaussian& b) -> py::object {
          const PairProduct p = product_pair(a, b);
          if (p.status == PairStatus::ZeroProduct) return py::none();
          return py::make_tuple(p.status == PairStatus::Ok ? "ok" : "degenerate", p.component);
        },
        "Collapsed product; None when the product is identically zero.");
  m.def("overlap_scale", &overlap_scale, py::arg("a"), py::arg("b"));
  m.def("mixture_product", &mixture_product, py::arg("a"), py::arg("b"));
  m.def("mixture_normalize", &mixture_normalize, py::arg("m"));
  m.def("mixture_reduce",
        [](const GaussianMixture& m_, double prune_eps, std::size_t max_components) {
          const ReduceResult r = mixture_reduce(m_, make_policy(prune_eps, max_components));
          return py::make_tuple(r.mixture, r.l1_change);
        },
        py::arg("m"), py::arg("prune_eps") = 0.0, py::arg("max_components") = 0,
        "max_components = 0 means unbounded; returns (mixture, l1_change)");
  m.def("mixture_l1_distance",
        [](const GaussianMixture& m_, const std::function<double(double)>& target, double lo,
           double hi, int n_points) { return mixture_l1_distance(m_, target, lo, hi, n_points); },
        py::arg("m"), py::arg("target"), py::arg("lo"), py::arg("hi"), py::arg("n_points"));

  py::class_<Network>(m, "Network")
      .def("node_count", &Network::node_count)
      .def("node_ids",
           [](const Network& net) {
             std::vector<NodeId> ids;
             ids.reserve(net.node_count());
             for (const auto& spec : net.nodes()) ids.push_back(spec.id);
             return ids;
           })
      .def("edge_count", &Network::edge_count)
      .def("prior",
           [](const Network& net, const NodeId& id) {
             return net.node(net.index_of(id)).prior();
           },
           py::arg("id"))
      .def("serialize", &serialize_network)
      .def("__repr__", [](const Network& net) {
        return "Network(" + std::to_string(net.node_count()) + " nodes, " +
               std::to_string(net.edge_count()) + " edges)";
      });

  m.def("load_network", &load_network, py::arg("text"),
        "Build a network from a JSON document string.");
  m.def("load_network_file", &load_network_file, py::arg("path"));
  m.def("serialize_network", &serialize_network, py::arg("net"));

  m.def("propagate",
        [](const Network& net, const std::map<NodeId, double>& evidence, double prune_eps,
           std::size_t max_components) {
          InferenceOptions options;
          options.reduction = make_policy(prune_eps, max_components);
          const InferenceResult result = propagate(net, Evidence{evidence}, options);
          return result.beliefs;
        },
        py::arg("net"), py::arg("evidence") = std::map<NodeId, double>{},
        py::arg("prune_eps") = 1e-9, py::arg("max_components") = 512,
        "Returns {node id: posterior mixture}; evidence beliefs are single Diracs.");

  py::class_<TargetDensity>(m, "TargetDensity")
      .def_static("uniform", &TargetDensity::uniform, py::arg("lo"), py::arg("hi"))
      .def_static("triangular", &TargetDensity::triangular, py::arg("lo"), py::arg("mode"),
                  py::arg("hi"))
      .def_static("tabulated", &TargetDensity::tabulated, py::arg("xs"), py::arg("ys"))
      .def_static("gaussian_mixture", &TargetDensity::gaussian_mixture, py::arg("m"))
      .def("__call__", &TargetDensity::operator(), py::arg("x"))
      .def("support", [](const TargetDensity& t) {
        return py::make_tuple(t.support_lo(), t.support_hi());
      });

  py::class_<FitReport>(m, "FitReport")
      .def_readonly("mixture", &FitReport::mixture)
      .def_readonly("l1_error", &FitReport::l1_error)
      .def_readonly("l2_error", &FitReport::l2_error)
      .def_readonly("iterations_used", &FitReport::iterations_used)
      .def("__repr__", [](const FitReport& r) {
        return "FitReport(l1=" + format_double(r.l1_error) + ", l2=" + format_double(r.l2_error) +
               ", iterations=" + std::to_string(r.iterations_used) + ")";
      });

  m.def("uniform_grid_fit",
        [](const TargetDensity& target, int n_components, double lo, double hi,
           std::optional<double> shared_variance, std::optional<double> spacing_multiple,
           int refine_steps, double step_size, int quadrature_points) {
          FitConfig config;
          config.n_components = n_components;
          config.lo = lo;
          config.hi = hi;
          if (shared_variance && spacing_multiple)
            throw Error(ErrorCode::InvalidArgument,
                        "pass either shared_variance or spacing_multiple, not both");
          if (shared_variance) config.variance_rule = VarianceRule::shared(*shared_variance);
          if (spacing_multiple) config.variance_rule = VarianceRule::spacing(*spacing_multiple);
          config.refine_steps = refine_steps;
          config.step_size = step_size;
          config.quadrature_points = quadrature_points;
          return uniform_grid_fit(target, config);
        },
        py::arg("target"), py::arg("n_components"), py::arg("lo"), py::arg("hi"),
        py::arg("shared_variance") = std::nullopt, py::arg("spacing_multiple") = std::nullopt,
        py::arg("refine_steps") = 0, py::arg("step_size") = 0.5,
        py::arg("quadrature_points") = 2001);

  m.def("fit_error",
        [](const GaussianMixture& m_, const TargetDensity& target, double lo, double hi,
           int n_points) {
          const auto [l1, l2] = fit_error(m_, target, lo, hi, n_points);
          return py::make_tuple(l1, l2);
        },
        py::arg("m"), py::arg("target"), py::arg("lo"), py::arg("hi"), py::arg("n_points"));

  m.def("calibrate_spacing_multiple", &calibrate_spacing_multiple, py::arg("target"),
        py::arg("n_components"), py::arg("lo"), py::arg("hi"),
        py::arg("quadrature_points") = 2001);

  m.attr("DEFAULT_SPACING_MULTIPLE") = kDefaultSpacingMultiple;
}
