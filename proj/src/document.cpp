#include "gsbp/document.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace gsbp {

namespace {

using nlohmann::json;

// line:column from a byte offset, for parse diagnostics
std::pair<std::size_t, std::size_t> locate(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

double require_number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || !obj[key].is_number())
    throw Error(ErrorCode::ParseError, where + ": missing numeric field '" + key + "'");
  return obj[key].get<double>();
}

GaussianMixture parse_mixture(const json& arr, const std::string& where) {
  if (!arr.is_array() || arr.empty())
    throw Error(ErrorCode::ParseError, where + ": expected a nonempty component array");
  std::vector<WeightedGaussian> comps;
  comps.reserve(arr.size());
  for (const auto& c : arr) {
    if (!c.is_object()) throw Error(ErrorCode::ParseError, where + ": component must be an object");
    comps.push_back({require_number(c, "w", where), require_number(c, "mean", where),
                     require_number(c, "var", where)});
  }
  return GaussianMixture(std::move(comps));
}

NodeSpec parse_node(const json& entry) {
  if (!entry.is_object()) throw Error(ErrorCode::ParseError, "node entry must be an object");
  if (!entry.contains("id") || !entry["id"].is_string())
    throw Error(ErrorCode::ParseError, "node entry needs a string 'id'");
  NodeSpec spec;
  spec.id = entry["id"].get<std::string>();
  const std::string where = "node '" + spec.id + "'";

  if (entry.contains("parents")) {
    if (!entry["parents"].is_array())
      throw Error(ErrorCode::ParseError, where + ": 'parents' must be an array");
    for (const auto& p : entry["parents"]) {
      if (!p.is_string()) throw Error(ErrorCode::ParseError, where + ": parent ids are strings");
      spec.parents.push_back(p.get<std::string>());
    }
  }

  const int model_count = static_cast<int>(entry.contains("prior")) +
                          static_cast<int>(entry.contains("linear_cpd")) +
                          static_cast<int>(entry.contains("mixture_cpd"));
  if (model_count != 1)
    throw Error(ErrorCode::ParseError,
                where + ": exactly one of 'prior', 'linear_cpd', 'mixture_cpd' required");

  if (entry.contains("prior")) {
    spec.model = parse_mixture(entry["prior"], where + " prior");
  } else if (entry.contains("linear_cpd")) {
    const json& lc = entry["linear_cpd"];
    if (!lc.is_object() || !lc.contains("coeffs") || !lc["coeffs"].is_array())
      throw Error(ErrorCode::ParseError, where + ": 'linear_cpd' needs a 'coeffs' array");
    LinearCPD cpd;
    for (const auto& b : lc["coeffs"]) {
      if (!b.is_number()) throw Error(ErrorCode::ParseError, where + ": coefficients are numbers");
      cpd.coefficients.push_back(b.get<double>());
    }
    cpd.noise_variance = require_number(lc, "noise_var", where);
    spec.model = std::move(cpd);
  } else {
    const json& mc = entry["mixture_cpd"];
    if (!mc.is_array() || mc.empty())
      throw Error(ErrorCode::ParseError, where + ": 'mixture_cpd' must be a nonempty array");
    ConditionalMixtureCPD cpd;
    for (const auto& c : mc) {
      CpdComponent comp;
      comp.weight = require_number(c, "w", where);
      comp.child_mean = require_number(c, "child_mean", where);
      comp.child_variance = require_number(c, "child_var", where);
      if (!c.contains("parents") || !c["parents"].is_array())
        throw Error(ErrorCode::ParseError, where + ": component needs a 'parents' array");
      for (const auto& f : c["parents"])
        comp.parents.push_back({require_number(f, "mean", where), require_number(f, "var", where)});
      cpd.components.push_back(std::move(comp));
    }
    spec.model = std::move(cpd);
  }
  return spec;
}

}  // namespace

std::vector<NodeSpec> parse_network_document(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    auto [line, col] = locate(text, e.byte > 0 ? e.byte - 1 : 0);
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ", column " +
                                           std::to_string(col) + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array())
    throw Error(ErrorCode::ParseError, "document needs a top-level 'nodes' array");
  std::vector<NodeSpec> specs;
  specs.reserve(doc["nodes"].size());
  for (const auto& entry : doc["nodes"]) specs.push_back(parse_node(entry));
  return specs;
}

Network load_network(const std::string& text) {
  return build_network(parse_network_document(text));
}

Network load_network_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_network(buffer.str());
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string serialize_mixture(const GaussianMixture& m) {
  std::string out = "[";
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (i) out += ", ";
    out += "{\"w\": " + format_double(m[i].weight) + ", \"mean\": " + format_double(m[i].mean) +
           ", \"var\": " + format_double(m[i].variance) + "}";
  }
  return out + "]";
}

std::string serialize_network(const Network& net) {
  std::string out = "{\n  \"nodes\": [\n";
  for (std::size_t i = 0; i < net.node_count(); ++i) {
    const NodeSpec& spec = net.node(i);
    out += "    {\"id\": " + json(spec.id).dump();
    if (!spec.parents.empty()) {
      out += ", \"parents\": [";
      for (std::size_t p = 0; p < spec.parents.size(); ++p) {
        if (p) out += ", ";
        out += json(spec.parents[p]).dump();
      }
      out += "]";
    }
    if (spec.has_prior()) {
      out += ", \"prior\": " + serialize_mixture(spec.prior());
    } else if (std::holds_alternative<LinearCPD>(spec.model)) {
      const auto& cpd = std::get<LinearCPD>(spec.model);
      out += ", \"linear_cpd\": {\"coeffs\": [";
      for (std::size_t b = 0; b < cpd.coefficients.size(); ++b) {
        if (b) out += ", ";
        out += format_double(cpd.coefficients[b]);
      }
      out += "], \"noise_var\": " + format_double(cpd.noise_variance) + "}";
    } else {
      const auto& cpd = std::get<ConditionalMixtureCPD>(spec.model);
      out += ", \"mixture_cpd\": [";
      for (std::size_t c = 0; c < cpd.components.size(); ++c) {
        const auto& comp = cpd.components[c];
        if (c) out += ", ";
        out += "{\"w\": " + format_double(comp.weight) +
               ", \"child_mean\": " + format_double(comp.child_mean) +
               ", \"child_var\": " + format_double(comp.child_variance) + ", \"parents\": [";
        for (std::size_t f = 0; f < comp.parents.size(); ++f) {
          if (f) out += ", ";
          out += "{\"mean\": " + format_double(comp.parents[f].mean) +
                 ", \"var\": " + format_double(comp.parents[f].variance) + "}";
        }
        out += "]}";
      }
      out += "]";
    }
    out += i + 1 < net.node_count() ? "},\n" : "}\n";
  }
  out += "  ]\n}\n";
  return out;
}

}  // namespace gsbp
