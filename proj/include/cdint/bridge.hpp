#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cdint/decay.hpp"
#include "cdint/errors.hpp"
#include "cdint/model.hpp"
#include "cdint/potentials.hpp"

// Bridges the discrete partition function to the continuous integral over
// [0,1]^n. Evaluating f on the left-endpoint grid {0, 1/N, .., (N-1)/N}^n
// and averaging (Z / N^n) approaches the integral as N grows; potential
// smoothness turns that into the two-sided sandwich implemented here.

namespace cdint {

struct ChosenLevels {
  int value = 0;          // first N whose sandwich is inside [e^-1/n, e^1/n]
  int formula_value = 0;  // ceil(k n^(3/2) |E|), the starting point
};

struct SandwichBounds {
  double lower_factor = 1.0;  // V >= lower_factor * (Z / N^n)
  double upper_factor = 1.0;  // V <= upper_factor * (Z / N^n)
};

// Grid-versus-integral factors for Lipschitz bound k: each edge contributes
// at most (1 +- sqrt(n) k / N) between a cell's value and its left endpoint.
inline SandwichBounds sandwich_bounds(double k, int vertex_count,
                                      int edge_count, int num_levels) {
  if (k < 0.0 || !std::isfinite(k))
    throw ValidationError("smoothness bound k must be finite and >= 0");
  if (vertex_count < 1) throw ValidationError("vertex count must be >= 1");
  if (edge_count < 0) throw ValidationError("edge count must be >= 0");
  if (num_levels < 1) throw ValidationError("level count must be >= 1");
  double t = std::sqrt(static_cast<double>(vertex_count)) * k / num_levels;
  if (t >= 1.0)
    throw ValidationError(
        "grid too coarse: sqrt(n) k / N = " + std::to_string(t) +
        " >= 1, increase N");
  return {std::pow(1.0 - t, edge_count), std::pow(1.0 + t, edge_count)};
}

// Smallest grid resolution whose sandwich is contained in
// [e^(-1/n), e^(1/n)]: start from ceil(k n^(3/2) |E|) and verify, stepping
// up if the closed form lands just outside.
inline ChosenLevels choose_num_levels(double k, int vertex_count,
                                      int edge_count) {
  if (!(k > 0.0) || !std::isfinite(k))
    throw ValidationError("smoothness bound k must be finite and > 0");
  if (vertex_count < 1) throw ValidationError("vertex count must be >= 1");
  if (edge_count < 1) throw ValidationError("edge count must be >= 1");
  double n = static_cast<double>(vertex_count);
  ChosenLevels chosen;
  chosen.formula_value =
      static_cast<int>(std::ceil(k * std::pow(n, 1.5) * edge_count));
  double lo = std::exp(-1.0 / n);
  double hi = std::exp(1.0 / n);
  int num_levels = std::max(1, chosen.formula_value);
  for (;; ++num_levels) {
    double t = std::sqrt(n) * k / num_levels;
    if (t >= 1.0) continue;
    SandwichBounds b = sandwich_bounds(k, vertex_count, edge_count,
                                       num_levels);
    if (b.lower_factor >= lo && b.upper_factor <= hi) break;
  }
  chosen.value = num_levels;
  return chosen;
}

struct IntegralOptions {
  std::optional<int> num_levels;
  std::optional<int> depth;
  std::optional<double> delta;
  std::optional<double> k;
  DecayOptions decay;
};

struct IntegralEstimate {
  double log_value = 0.0;  // log of Z_hat / N^n
  double value = 0.0;
  double k = 0.0;
  int num_levels = 0;
  int formula_num_levels = 0;
  double lower_factor = 1.0;
  double upper_factor = 1.0;
  double combined_lower = 0.0;      // certified bracket around the true
  double combined_upper = 0.0;      // integral, folding in the Z error
  double combined_rel_bound = 0.0;  // worst endpoint deviation, relative
  ZEstimate z;
};

namespace detail {

inline double max_smoothness_bound(const std::vector<Potential>& potentials) {
  double k = 0.0;
  for (const Potential& p : potentials) k = std::max(k, p.gradient_bound());
  return k;
}

}  // namespace detail

// Everything estimate_integral decides before any recursion runs: the
// smoothness bound, the grid, the sandwich, the level model, and the depth.
// Splitting this out lets a caller veto an infeasible plan up front.
struct IntegralPlan {
  double k = 0.0;
  int num_levels = 0;
  int formula_num_levels = 0;
  double lower_factor = 1.0;
  double upper_factor = 1.0;
  int depth = 0;
  Model model;
};

inline IntegralPlan plan_integral(const Hypergraph& graph,
                                  std::vector<Potential> potentials,
                                  const IntegralOptions& opts = {}) {
  if (potentials.size() != static_cast<std::size_t>(graph.edge_count()))
    throw ValidationError("expected one potential per edge");
  for (std::size_t e = 0; e < potentials.size(); ++e)
    if (!potentials[e].has_continuous_form())
      throw ValidationError(
          "integral estimation needs continuous potentials; edge " +
          std::to_string(e) + " is a table");

  double k = opts.k ? *opts.k : detail::max_smoothness_bound(potentials);
  if (k < 0.0 || !std::isfinite(k))
    throw ValidationError("smoothness bound k must be finite and >= 0");

  const int n = graph.vertex_count();
  int num_levels = 0;
  int formula_num_levels = 0;
  if (opts.num_levels) {
    if (*opts.num_levels < 1)
      throw ValidationError("level count must be >= 1");
    num_levels = *opts.num_levels;
    formula_num_levels = num_levels;
  } else if (k == 0.0 || graph.edge_count() == 0) {
    num_levels = 1;  // f is constant along the grid directions
    formula_num_levels = 1;
  } else {
    ChosenLevels chosen = choose_num_levels(k, n, graph.edge_count());
    num_levels = chosen.value;
    formula_num_levels = chosen.formula_value;
  }
  SandwichBounds sandwich =
      sandwich_bounds(k, n, graph.edge_count(), num_levels);

  double delta =
      opts.delta ? *opts.delta : detail::auto_delta(graph, potentials);
  Model model(graph, std::move(potentials), num_levels, delta);
  int depth = opts.depth ? *opts.depth : choose_depth(model);
  return {k,
          num_levels,
          formula_num_levels,
          sandwich.lower_factor,
          sandwich.upper_factor,
          depth,
          std::move(model)};
}

inline IntegralEstimate run_integral(const IntegralPlan& plan,
                                     const DecayOptions& decay = {}) {
  IntegralEstimate est;
  est.k = plan.k;
  est.num_levels = plan.num_levels;
  est.formula_num_levels = plan.formula_num_levels;
  est.lower_factor = plan.lower_factor;
  est.upper_factor = plan.upper_factor;
  est.z = approx_z(plan.model, plan.depth, decay);

  const int n = plan.model.graph().vertex_count();
  est.log_value =
      est.z.log_value - n * std::log(static_cast<double>(est.num_levels));
  est.value = std::exp(est.log_value);

  double e = est.z.per_step_error;
  est.combined_lower = std::exp(est.log_value + std::log(est.lower_factor) -
                                n * std::log1p(e));
  if (e < 1.0) {
    est.combined_upper = std::exp(est.log_value +
                                  std::log(est.upper_factor) -
                                  n * std::log1p(-e));
    est.combined_rel_bound =
        std::max(est.combined_upper / est.value - 1.0,
                 1.0 - est.combined_lower / est.value);
  } else {
    est.combined_upper = std::numeric_limits<double>::infinity();
    est.combined_rel_bound = std::numeric_limits<double>::infinity();
  }
  return est;
}

// End-to-end integral estimate: pick a grid from the smoothness bound, run
// the partition-function estimator on the induced level model, and divide by
// N^n, reporting the certified bracket.
inline IntegralEstimate estimate_integral(const Hypergraph& graph,
                                          std::vector<Potential> potentials,
                                          const IntegralOptions& opts = {}) {
  return run_integral(plan_integral(graph, std::move(potentials), opts),
                      opts.decay);
}

}  // namespace cdint
