#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

#include "cdint/errors.hpp"
#include "cdint/hypergraph.hpp"
#include "cdint/model.hpp"
#include "cdint/potentials.hpp"

// JSON model files. The document describes the vertex set, the hyperedges,
// and one potential per edge; the level count and decay margin may be given
// in the file or supplied by the caller.

namespace cdint {

struct PotentialSpec {
  PotentialFamily family = PotentialFamily::table;
  std::vector<double> table_values;
  double c = 1.0;       // exp-bilinear scale
  double epsilon = 0.0; // exp-bilinear exponent
};

struct ModelFile {
  int vertex_count = 0;
  std::vector<std::string> vertex_names;  // empty when vertices was a count
  std::vector<std::vector<int>> edges;
  std::vector<PotentialSpec> potentials;
  std::optional<int> num_levels;
  std::optional<double> delta;
};

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& path,
                                    const std::string& what) {
  throw ParseError(path + ": " + what);
}

inline std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

inline const nlohmann::json& member(const nlohmann::json& j,
                                    const std::string& key,
                                    const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) parse_fail(join_path(path, key), "missing");
  return *it;
}

inline int as_int(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number_integer()) parse_fail(path, "expected an integer");
  return j.get<int>();
}

inline double as_number(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number()) parse_fail(path, "expected a number");
  return j.get<double>();
}

inline std::string as_string(const nlohmann::json& j,
                             const std::string& path) {
  if (!j.is_string()) parse_fail(path, "expected a string");
  return j.get<std::string>();
}

inline PotentialSpec parse_potential(const nlohmann::json& j,
                                     const std::string& path) {
  if (!j.is_object()) parse_fail(path, "expected an object");
  PotentialSpec spec;
  std::string family = as_string(member(j, "family", path),
                                 join_path(path, "family"));
  if (family == "table") {
    spec.family = PotentialFamily::table;
    const nlohmann::json& values = member(j, "values", path);
    std::string values_path = join_path(path, "values");
    if (!values.is_array() || values.empty())
      parse_fail(values_path, "expected a non-empty array of numbers");
    for (std::size_t i = 0; i < values.size(); ++i)
      spec.table_values.push_back(as_number(
          values[i], values_path + "[" + std::to_string(i) + "]"));
    // an optional "c" is tolerated here; the minimum of the values wins
  } else if (family == "exp-bilinear") {
    spec.family = PotentialFamily::exp_bilinear;
    spec.c = as_number(member(j, "c", path), join_path(path, "c"));
    spec.epsilon =
        as_number(member(j, "epsilon", path), join_path(path, "epsilon"));
  } else {
    parse_fail(join_path(path, "family"),
               "unknown family \"" + family +
                   "\" (expected \"table\" or \"exp-bilinear\")");
  }
  return spec;
}

}  // namespace detail

inline ModelFile parse_model_file(const nlohmann::json& j) {
  using detail::as_int;
  using detail::as_number;
  using detail::as_string;
  using detail::join_path;
  using detail::member;
  using detail::parse_fail;

  if (!j.is_object()) parse_fail("(document)", "expected an object");
  ModelFile file;

  const nlohmann::json& vertices = member(j, "vertices", "");
  std::unordered_map<std::string, int> name_index;
  if (vertices.is_number_integer()) {
    file.vertex_count = vertices.get<int>();
    if (file.vertex_count < 1)
      parse_fail("vertices", "vertex count must be >= 1");
  } else if (vertices.is_array()) {
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      std::string path = "vertices[" + std::to_string(i) + "]";
      std::string name = as_string(vertices[i], path);
      if (name.empty()) parse_fail(path, "vertex name must be non-empty");
      if (!name_index.emplace(name, static_cast<int>(i)).second)
        parse_fail(path, "duplicate vertex name \"" + name + "\"");
      file.vertex_names.push_back(std::move(name));
    }
    file.vertex_count = static_cast<int>(file.vertex_names.size());
    if (file.vertex_count < 1)
      parse_fail("vertices", "vertex list must be non-empty");
  } else {
    parse_fail("vertices", "expected a count or an array of names");
  }

  const nlohmann::json& edges = member(j, "edges", "");
  if (!edges.is_array()) parse_fail("edges", "expected an array");
  for (std::size_t e = 0; e < edges.size(); ++e) {
    std::string edge_path = "edges[" + std::to_string(e) + "]";
    const nlohmann::json& edge = edges[e];
    if (!edge.is_object()) parse_fail(edge_path, "expected an object");

    const nlohmann::json& members =
        member(edge, "vertices", edge_path);
    std::string members_path = join_path(edge_path, "vertices");
    if (!members.is_array() || members.empty())
      parse_fail(members_path, "expected a non-empty array");
    std::vector<int> resolved;
    for (std::size_t i = 0; i < members.size(); ++i) {
      std::string path = members_path + "[" + std::to_string(i) + "]";
      const nlohmann::json& v = members[i];
      if (v.is_number_integer()) {
        resolved.push_back(v.get<int>());
      } else if (v.is_string()) {
        auto it = name_index.find(v.get<std::string>());
        if (it == name_index.end())
          parse_fail(path,
                     "unknown vertex name \"" + v.get<std::string>() + "\"");
        resolved.push_back(it->second);
      } else {
        parse_fail(path, "expected a vertex index or name");
      }
    }
    file.edges.push_back(std::move(resolved));

    file.potentials.push_back(detail::parse_potential(
        member(edge, "potential", edge_path),
        join_path(edge_path, "potential")));
  }

  if (j.contains("N")) {
    int n = as_int(j.at("N"), "N");
    if (n < 1) parse_fail("N", "level count must be >= 1");
    file.num_levels = n;
  }
  if (j.contains("delta")) {
    double d = as_number(j.at("delta"), "delta");
    if (!(d > 0.0) || d >= 1.0)
      parse_fail("delta", "expected a number in (0, 1)");
    file.delta = d;
  }
  return file;
}

inline ModelFile load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return parse_model_file(j);
}

// Level count implied by the table potentials: each table of arity r must
// hold exactly N^r values, and every table must agree on N.
inline std::optional<int> infer_num_levels(const ModelFile& file) {
  std::optional<int> inferred;
  for (std::size_t e = 0; e < file.potentials.size(); ++e) {
    const PotentialSpec& spec = file.potentials[e];
    if (spec.family != PotentialFamily::table) continue;
    int arity = static_cast<int>(file.edges[e].size());
    std::size_t size = spec.table_values.size();
    auto pow_of = [arity](int n) {
      std::size_t p = 1;
      for (int i = 0; i < arity; ++i) p *= static_cast<std::size_t>(n);
      return p;
    };
    int num_levels = 1;
    while (pow_of(num_levels) < size) ++num_levels;
    if (pow_of(num_levels) != size)
      throw ValidationError(
          "edge " + std::to_string(e) + ": table has " +
          std::to_string(size) + " values, not N^" + std::to_string(arity) +
          " for any N");
    if (inferred && *inferred != num_levels)
      throw ValidationError(
          "edge " + std::to_string(e) + ": table implies N = " +
          std::to_string(num_levels) + " but an earlier table implies N = " +
          std::to_string(*inferred));
    inferred = num_levels;
  }
  return inferred;
}

inline Hypergraph build_graph(const ModelFile& file) {
  return Hypergraph(file.vertex_count, file.edges);
}

inline std::vector<Potential> build_potentials(const ModelFile& file,
                                               std::optional<int> num_levels) {
  std::vector<Potential> out;
  for (std::size_t e = 0; e < file.potentials.size(); ++e) {
    const PotentialSpec& spec = file.potentials[e];
    int arity = static_cast<int>(file.edges[e].size());
    try {
      if (spec.family == PotentialFamily::table) {
        if (!num_levels)
          throw ValidationError("a table potential needs a level count");
        out.push_back(
            Potential::table(arity, *num_levels, spec.table_values));
      } else {
        out.push_back(Potential::exp_bilinear(arity, spec.c, spec.epsilon));
      }
    } catch (const ValidationError& err) {
      throw ValidationError("edge " + std::to_string(e) + ": " + err.what());
    }
  }
  return out;
}

struct InstantiateOptions {
  std::optional<int> num_levels;  // overrides the file
  std::optional<double> delta;    // overrides the file
  bool delta_auto = false;        // ignore the file, derive from the window
};

inline int resolve_num_levels(const ModelFile& file,
                              std::optional<int> override_levels) {
  if (override_levels) return *override_levels;
  if (file.num_levels) return *file.num_levels;
  if (auto inferred = infer_num_levels(file)) return *inferred;
  throw ValidationError(
      "no level count: the file has no \"N\" and no table fixes one");
}

inline Model instantiate_model(const ModelFile& file,
                               const InstantiateOptions& opts = {}) {
  int num_levels = resolve_num_levels(file, opts.num_levels);
  Hypergraph graph = build_graph(file);
  std::vector<Potential> potentials = build_potentials(file, num_levels);
  double delta;
  if (opts.delta)
    delta = *opts.delta;
  else if (!opts.delta_auto && file.delta)
    delta = *file.delta;
  else
    delta = detail::auto_delta(graph, potentials);
  return Model(std::move(graph), std::move(potentials), num_levels, delta);
}

}  // namespace cdint
