#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cdint/constraints.hpp"
#include "cdint/errors.hpp"
#include "cdint/model.hpp"
#include "cdint/numeric.hpp"

// Exact brute-force computations on small instances: the ground-truth oracle
// for every approximation in this library. Intentionally naive - plain
// enumeration in a fixed order - so its correctness is self-evident.

namespace cdint {

// Marks vertices as deleted; deleting a vertex removes every incident edge.
// An empty mask means nothing is deleted.
using VertexMask = std::vector<std::uint8_t>;

struct ExactResult {
  double log_value = 0.0;
  double value = 0.0;  // exp(log_value); may overflow to +inf
};

struct OracleOptions {
  std::uint64_t budget = 100'000'000;  // max enumerated assignments
};

namespace detail {

inline bool vertex_deleted(const VertexMask& deleted, int v) {
  return !deleted.empty() && deleted[static_cast<std::size_t>(v)] != 0;
}

inline bool edge_alive(const Hypergraph& graph, const VertexMask& deleted,
                       int e) {
  if (deleted.empty()) return true;
  for (int v : graph.edge(e))
    if (deleted[static_cast<std::size_t>(v)]) return false;
  return true;
}

inline void check_constraints(const Model& model, const ConstraintSet& beta) {
  if (beta.vertex_count() != model.graph().vertex_count())
    throw ValidationError("constraint set sized for " +
                          std::to_string(beta.vertex_count()) +
                          " vertices, model has " +
                          std::to_string(model.graph().vertex_count()));
  for (int v = 0; v < beta.vertex_count(); ++v)
    if (beta.constrained(v) && beta.level(v) >= model.num_levels())
      throw ValidationError("constraint " + std::to_string(v) + " <- " +
                            std::to_string(beta.level(v)) +
                            " outside [0, N = " +
                            std::to_string(model.num_levels()) + ")");
}

inline void check_mask(const Model& model, const VertexMask& deleted) {
  if (!deleted.empty() &&
      deleted.size() != static_cast<std::size_t>(model.graph().vertex_count()))
    throw ValidationError("vertex mask size mismatch");
}

// log f restricted to the edges alive under the mask.
inline double log_f_masked(const Model& model, std::span<const int> levels,
                           const VertexMask& deleted) {
  const Hypergraph& g = model.graph();
  double log_f = 0.0;
  std::vector<int> edge_levels;
  for (int e = 0; e < g.edge_count(); ++e) {
    if (!edge_alive(g, deleted, e)) continue;
    const auto& edge = g.edge(e);
    edge_levels.assign(edge.size(), 0);
    for (std::size_t i = 0; i < edge.size(); ++i)
      edge_levels[i] = levels[edge[i]];
    log_f += model.potential(e).log_eval_levels(edge_levels,
                                                model.num_levels());
  }
  return log_f;
}

}  // namespace detail

// log f(y) = sum_e log Phi_e(y_e) for a full assignment of discrete levels.
inline double log_f_eval(const Model& model, std::span<const int> levels) {
  if (levels.size() !=
      static_cast<std::size_t>(model.graph().vertex_count()))
    throw ValidationError("assignment needs one level per vertex");
  for (int m : levels)
    if (m < 0 || m >= model.num_levels())
      throw ValidationError("assignment level outside [0, N)");
  return detail::log_f_masked(model, levels, {});
}

// Restricted partition function Z(G, beta) on the subgraph left alive by
// `deleted`. Sums f over all completions of beta in ascending lexicographic
// order over the unconstrained vertices, accumulated via log-sum-exp.
inline ExactResult z_exact(const Model& model, const ConstraintSet& beta,
                           const VertexMask& deleted,
                           const OracleOptions& opts = {}) {
  detail::check_constraints(model, beta);
  detail::check_mask(model, deleted);
  const int n = model.graph().vertex_count();
  const int num_levels = model.num_levels();

  std::vector<int> free_vertices;
  std::vector<int> levels(n, 0);
  for (int v = 0; v < n; ++v) {
    if (detail::vertex_deleted(deleted, v)) continue;
    if (beta.constrained(v))
      levels[v] = beta.level(v);
    else
      free_vertices.push_back(v);
  }

  double required = std::pow(static_cast<double>(num_levels),
                             static_cast<double>(free_vertices.size()));
  if (required > static_cast<double>(opts.budget))
    throw BudgetError("exact enumeration needs N^u = " +
                          std::to_string(num_levels) + "^" +
                          std::to_string(free_vertices.size()) + " = " +
                          std::to_string(required) +
                          " evaluations, over the budget of " +
                          std::to_string(opts.budget),
                      required);

  LogSumAccumulator acc;
  while (true) {
    acc.add(detail::log_f_masked(model, levels, deleted));
    // odometer: last free vertex cycles fastest
    int i = static_cast<int>(free_vertices.size()) - 1;
    for (; i >= 0; --i) {
      int v = free_vertices[i];
      if (++levels[v] < num_levels) break;
      levels[v] = 0;
    }
    if (i < 0) break;
  }
  double log_z = acc.log_sum();
  return {log_z, std::exp(log_z)};
}

inline ExactResult z_exact(const Model& model, const ConstraintSet& beta,
                           const OracleOptions& opts = {}) {
  return z_exact(model, beta, {}, opts);
}

// x(G, v <- m, beta) = Z(G, (beta, v <- m)) / Z(G, beta).
inline double marginal_exact(const Model& model, int v, int m,
                             const ConstraintSet& beta,
                             const VertexMask& deleted,
                             const OracleOptions& opts = {}) {
  if (v < 0 || v >= model.graph().vertex_count())
    throw ValidationError("vertex index out of range");
  if (detail::vertex_deleted(deleted, v))
    throw ValidationError("vertex " + std::to_string(v) + " is deleted");
  if (beta.constrained(v))
    throw ValidationError("vertex " + std::to_string(v) +
                          " is already constrained");
  if (m < 0 || m >= model.num_levels())
    throw ValidationError("level outside [0, N)");
  ConstraintSet pinned(beta);
  pinned.pin(v, m);
  double log_num = z_exact(model, pinned, deleted, opts).log_value;
  double log_den = z_exact(model, beta, deleted, opts).log_value;
  return std::exp(log_num - log_den);
}

inline double marginal_exact(const Model& model, int v, int m,
                             const ConstraintSet& beta,
                             const OracleOptions& opts = {}) {
  return marginal_exact(model, v, m, beta, {}, opts);
}

struct QuadratureResult {
  int refinement = 0;      // M
  double value = 0.0;      // midpoint rule at M points per axis
  double refined_value = 0.0;  // same at 2M, so convergence is observable
  double log_value = 0.0;
  double log_refined_value = 0.0;
};

namespace detail {

inline double log_midpoint_quadrature(const Model& model, int refinement) {
  const Hypergraph& g = model.graph();
  const int n = g.vertex_count();
  std::vector<int> index(n, 0);
  std::vector<double> point(n, 0.0);
  std::vector<double> edge_point;
  LogSumAccumulator acc;
  while (true) {
    for (int v = 0; v < n; ++v)
      point[v] = (index[v] + 0.5) / refinement;
    double log_f = 0.0;
    for (int e = 0; e < g.edge_count(); ++e) {
      const auto& edge = g.edge(e);
      edge_point.assign(edge.size(), 0.0);
      for (std::size_t i = 0; i < edge.size(); ++i)
        edge_point[i] = point[edge[i]];
      log_f += model.potential(e).log_eval(edge_point);
    }
    acc.add(log_f);
    int i = n - 1;
    for (; i >= 0; --i) {
      if (++index[i] < refinement) break;
      index[i] = 0;
    }
    if (i < 0) break;
  }
  return acc.log_sum() - n * std::log(static_cast<double>(refinement));
}

}  // namespace detail

// Midpoint-rule reference for the integral of f over [0,1]^n, reported at
// refinements M and 2M. A test oracle only - not part of the approximation
// path - restricted to small n and continuous potential families.
inline QuadratureResult integral_reference(const Model& model, int refinement,
                                           const OracleOptions& opts = {}) {
  if (refinement < 1) throw ValidationError("refinement must be >= 1");
  const int n = model.graph().vertex_count();
  if (n > 4)
    throw ValidationError(
        "integral_reference is limited to n <= 4 (oracle quadrature)");
  for (int e = 0; e < model.graph().edge_count(); ++e)
    if (!model.potential(e).has_continuous_form())
      throw ValidationError(
          "integral_reference needs continuous potentials; edge " +
          std::to_string(e) + " is a table");
  double worst = std::pow(2.0 * refinement, n);
  if (worst > static_cast<double>(opts.budget))
    throw BudgetError("quadrature needs (2M)^n = " + std::to_string(worst) +
                          " evaluations, over the budget of " +
                          std::to_string(opts.budget),
                      worst);
  QuadratureResult result;
  result.refinement = refinement;
  result.log_value = detail::log_midpoint_quadrature(model, refinement);
  result.log_refined_value =
      detail::log_midpoint_quadrature(model, 2 * refinement);
  result.value = std::exp(result.log_value);
  result.refined_value = std::exp(result.log_refined_value);
  return result;
}

}  // namespace cdint
