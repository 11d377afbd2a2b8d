#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "cdint/errors.hpp"
#include "cdint/hypergraph.hpp"
#include "cdint/potentials.hpp"

namespace cdint {

// Multiplicative spread the potentials must fit within for correlation decay
// to hold:  (1 - delta)^{1/(2*Delta)} * (1 + ln(1 + 1/eta) / (2*Delta)).
// Natural logarithm throughout.
inline double admissibility_window(double delta, int max_degree,
                                   int max_neighbors) {
  if (!(delta >= 0.0 && delta < 1.0))
    throw ValidationError("admissibility window needs delta in [0, 1), got " +
                          std::to_string(delta));
  if (max_degree < 1)
    throw ValidationError("admissibility window needs max degree >= 1");
  if (max_neighbors < 1)
    throw ValidationError("admissibility window needs max neighbor count >= 1");
  double two_delta = 2.0 * max_degree;
  return std::pow(1.0 - delta, 1.0 / two_delta) *
         (1.0 + std::log1p(1.0 / max_neighbors) / two_delta);
}

// Largest delta keeping a potential spread of rho admissible:
//   delta* = 1 - (rho / (1 + ln(1 + 1/eta)/(2*Delta)))^{2*Delta},
// the exact inverse of admissibility_window in delta. Throws when rho
// exceeds the delta = 0 window (no positive delta exists).
inline double max_admissible_delta(double rho, int max_degree,
                                   int max_neighbors) {
  if (!(rho >= 1.0))
    throw ValidationError("max_admissible_delta needs rho >= 1, got " +
                          std::to_string(rho));
  double zero_window = admissibility_window(0.0, max_degree, max_neighbors);
  if (rho > zero_window)
    throw ValidationError(
        "window exceeded: potential spread " + std::to_string(rho) +
        " is above the delta = 0 window " + std::to_string(zero_window) +
        " at Delta = " + std::to_string(max_degree) +
        ", eta = " + std::to_string(max_neighbors));
  double delta = 1.0 - std::pow(rho / zero_window, 2.0 * max_degree);
  return std::max(delta, 0.0);
}

namespace detail {

// The window formula needs eta >= 1. A graph whose edges are all unary has
// eta = 0 but still interacts with the grid; checking it against the eta = 1
// window is strictly conservative.
inline int effective_neighbor_bound(const Hypergraph& g) {
  return std::max(g.max_neighbor_count(), 1);
}

// Relative slack for window comparisons, so that delta derived by the exact
// inverse cannot flip the check through pow/log rounding.
constexpr double kWindowSlack = 1e-12;

// Default decay margin: the exact inverse of the window at the worst
// potential spread. An edgeless graph has nothing to decay, so any margin
// works there.
inline double auto_delta(const Hypergraph& graph,
                         const std::vector<Potential>& potentials) {
  if (graph.edge_count() == 0) return 0.5;
  double spread = 1.0;
  for (const Potential& p : potentials)
    spread = std::max(spread, p.upper_factor());
  double delta = max_admissible_delta(spread, graph.max_degree(),
                                      effective_neighbor_bound(graph));
  if (!(delta > 0.0))
    throw ValidationError(
        "potential spread fills the admissibility window exactly; no decay "
        "margin is left, pass delta explicitly");
  return delta;
}

}  // namespace detail

struct EdgeAdmissibility {
  int edge = 0;
  double lower = 0.0;         // c_e
  double upper_factor = 0.0;  // observed or declared spread
  double margin = 0.0;        // window - upper_factor
  int offending_index = -1;   // first grid point above window * c_e (tables)
  bool pass = true;
};

struct AdmissibilityReport {
  bool pass = true;
  double delta = 0.0;
  double window = std::numeric_limits<double>::infinity();
  std::vector<EdgeAdmissibility> edges;
};

// Per-edge admissibility of the potentials against the window at delta.
// Works on raw components so inadmissible inputs still yield a full report.
inline AdmissibilityReport check_admissibility(
    const Hypergraph& graph, const std::vector<Potential>& potentials,
    double delta) {
  if (potentials.size() != static_cast<std::size_t>(graph.edge_count()))
    throw ValidationError("expected one potential per edge: " +
                          std::to_string(graph.edge_count()) + " edges, " +
                          std::to_string(potentials.size()) + " potentials");
  AdmissibilityReport report;
  report.delta = delta;
  if (graph.edge_count() == 0) return report;  // nothing to bound

  report.window = admissibility_window(delta, graph.max_degree(),
                                       detail::effective_neighbor_bound(graph));
  for (int e = 0; e < graph.edge_count(); ++e) {
    const Potential& p = potentials[e];
    EdgeAdmissibility entry;
    entry.edge = e;
    entry.lower = p.lower_bound();
    entry.upper_factor = p.upper_factor();
    entry.margin = report.window - entry.upper_factor;
    entry.pass =
        entry.upper_factor <= report.window * (1.0 + detail::kWindowSlack);
    if (!entry.pass && p.family() == PotentialFamily::table) {
      const auto& values = p.table_values();
      double cap = report.window * entry.lower * (1.0 + detail::kWindowSlack);
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] > cap) {
          entry.offending_index = static_cast<int>(i);
          break;
        }
      }
    }
    report.pass = report.pass && entry.pass;
    report.edges.push_back(entry);
  }
  return report;
}

// Hypergraph + one potential per edge + grid resolution N + decay margin
// delta. Construction validates everything, including admissibility, and
// caches the window; instances are immutable and safe to share.
class Model {
public:
  Model(Hypergraph graph, std::vector<Potential> potentials, int num_levels,
        double delta)
      : graph_(std::move(graph)),
        potentials_(std::move(potentials)),
        num_levels_(num_levels),
        delta_(delta) {
    if (num_levels_ < 1)
      throw ValidationError("relaxation parameter N must be >= 1, got " +
                            std::to_string(num_levels_));
    if (!(delta_ > 0.0 && delta_ < 1.0))
      throw ValidationError("decay margin delta must lie in (0, 1), got " +
                            std::to_string(delta_));
    if (potentials_.size() != static_cast<std::size_t>(graph_.edge_count()))
      throw ValidationError("expected one potential per edge: " +
                            std::to_string(graph_.edge_count()) + " edges, " +
                            std::to_string(potentials_.size()) +
                            " potentials");
    for (int e = 0; e < graph_.edge_count(); ++e) {
      const Potential& p = potentials_[e];
      int arity = static_cast<int>(graph_.edge(e).size());
      if (p.arity() != arity)
        throw ValidationError("edge " + std::to_string(e) + " has " +
                              std::to_string(arity) + " vertices but its " +
                              "potential has arity " +
                              std::to_string(p.arity()));
      if (p.family() == PotentialFamily::table &&
          p.table_num_levels() != num_levels_)
        throw ValidationError("edge " + std::to_string(e) +
                              ": table potential is bound to N = " +
                              std::to_string(p.table_num_levels()) +
                              " but the model has N = " +
                              std::to_string(num_levels_));
      max_upper_factor_ = std::max(max_upper_factor_, p.upper_factor());
    }

    auto report = check_admissibility(graph_, potentials_, delta_);
    window_ = report.window;
    for (const auto& entry : report.edges) {
      if (!entry.pass)
        throw ValidationError(
            "edge " + std::to_string(entry.edge) +
            " violates admissibility: spread " +
            std::to_string(entry.upper_factor) + " > window " +
            std::to_string(report.window) + " at delta = " +
            std::to_string(delta_));
    }
  }

  const Hypergraph& graph() const noexcept { return graph_; }
  const std::vector<Potential>& potentials() const noexcept {
    return potentials_;
  }
  const Potential& potential(int e) const { return potentials_.at(e); }
  /// N: grid levels per coordinate; level m sits at the point m/N.
  int num_levels() const noexcept { return num_levels_; }
  double delta() const noexcept { return delta_; }
  /// Cached window at (delta, Delta, eta); +inf for an edgeless graph.
  double window() const noexcept { return window_; }
  /// rho: largest upper factor over the edges (1 for an edgeless graph).
  double max_upper_factor() const noexcept { return max_upper_factor_; }

private:
  Hypergraph graph_;
  std::vector<Potential> potentials_;
  int num_levels_;
  double delta_;
  double window_ = std::numeric_limits<double>::infinity();
  double max_upper_factor_ = 1.0;
};

inline AdmissibilityReport check_admissibility(const Model& model) {
  return check_admissibility(model.graph(), model.potentials(), model.delta());
}

struct GradientEdgeCheck {
  int edge = 0;
  bool applicable = false;  // false for table potentials
  double declared = 0.0;    // k_e
  double observed = 0.0;    // max sampled ||grad Phi||_2 / c_e
  bool pass = true;
};

struct GradientReport {
  bool pass = true;
  std::vector<GradientEdgeCheck> edges;
};

// Spot-checks every declared gradient bound by central differences at
// deterministic sample points (relative tolerance 1e-4). Table edges are
// reported as not applicable; a collection with no continuous edge at all is
// an error, since there is nothing to check.
inline GradientReport check_gradient_bound(
    const std::vector<Potential>& potentials, int samples_per_edge = 256) {
  GradientReport report;
  bool any_continuous = false;
  for (std::size_t e = 0; e < potentials.size(); ++e) {
    const Potential& p = potentials[e];
    GradientEdgeCheck entry;
    entry.edge = static_cast<int>(e);
    if (p.has_continuous_form()) {
      any_continuous = true;
      entry.applicable = true;
      entry.declared = p.gradient_bound();
      entry.observed = sampled_gradient_sup(p, samples_per_edge);
      entry.pass = entry.observed <= entry.declared * (1.0 + 1e-4) + 1e-12;
      report.pass = report.pass && entry.pass;
    }
    report.edges.push_back(entry);
  }
  if (!any_continuous)
    throw ValidationError(
        "no continuous counterpart: every potential is a table");
  return report;
}

inline GradientReport check_gradient_bound(const Model& model,
                                           int samples_per_edge = 256) {
  return check_gradient_bound(model.potentials(), samples_per_edge);
}

}  // namespace cdint
