#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cdint/constraints.hpp"
#include "cdint/errors.hpp"
#include "cdint/model.hpp"
#include "cdint/numeric.hpp"
#include "cdint/oracle.hpp"

// The correlation-decay estimator. A vertex marginal is written as a fixed
// rational map of its neighbors' conditional marginals; recursing on that map
// to a finite depth, with the uniform distribution at the bottom, yields an
// estimate whose error contracts geometrically as long as every potential's
// spread fits the admissibility window.

namespace cdint {

namespace detail {

// Flattens levels (y_1 .. y_k), y_1 most significant, into a table index.
inline std::size_t level_index(std::span<const int> levels, int num_levels) {
  std::size_t idx = 0;
  for (int y : levels) idx = idx * num_levels + static_cast<std::size_t>(y);
  return idx;
}

inline std::size_t level_table_size(int prefix_length, int num_levels) {
  std::size_t size = 1;
  for (int i = 0; i < prefix_length; ++i)
    size *= static_cast<std::size_t>(num_levels);
  return size;
}

// Inverse of level_index over y.size() positions.
inline void decode_levels(std::size_t idx, int num_levels,
                          std::vector<int>& y) {
  for (std::size_t t = y.size(); t-- > 0;) {
    y[t] = static_cast<int>(idx % static_cast<std::size_t>(num_levels));
    idx /= static_cast<std::size_t>(num_levels);
  }
}

}  // namespace detail

// Conditional marginal estimates for the ordered free neighbors u_1 .. u_k of
// some query vertex: tables[j] maps (y_1 .. y_j, y) to an estimate of the
// marginal of u_{j+1} at level y given u_1 <- y_1, .., u_j <- y_j, with the
// query vertex removed from the graph. tables[j] holds N^(j+1) entries
// indexed lexicographically, earliest neighbor most significant.
struct ConditionalMarginals {
  std::vector<int> neighbor_order;
  int num_levels = 0;
  std::vector<std::vector<double>> tables;

  double entry(int j, std::span<const int> prefix_and_level) const {
    return tables[static_cast<std::size_t>(j)]
                 [detail::level_index(prefix_and_level, num_levels)];
  }

  bool is_row_stochastic(double tol = 1e-9) const {
    for (std::size_t j = 0; j < tables.size(); ++j) {
      std::size_t rows = detail::level_table_size(static_cast<int>(j),
                                                  num_levels);
      for (std::size_t row = 0; row < rows; ++row) {
        double sum = 0.0;
        for (int y = 0; y < num_levels; ++y)
          sum += tables[j][row * num_levels + y];
        if (std::abs(sum - 1.0) > tol) return false;
      }
    }
    return true;
  }
};

struct DecayOptions {
  int threads = 1;
  bool use_cache = false;
};

struct DecayEstimate {
  double value = 0.0;
  int depth = 0;
  double error_bound = 0.0;          // (1 - delta)^depth
  std::uint64_t recursive_calls = 0; // invocations beneath the top-level call
};

struct ZEstimate {
  double log_value = 0.0;
  double value = 0.0;
  int depth = 0;
  double delta = 0.0;
  double per_step_error = 0.0;   // sqrt(2) * N * (1 - delta)^depth
  double per_step_lower = 0.0;   // every telescoping marginal is >= this
  double rel_error_bound = 0.0;  // (1 + per_step_error)^n - 1, inf if >= 1
  std::uint64_t recursive_calls = 0;
  std::vector<double> step_values;
};

namespace detail {

// Ascending list of neighbors of v that are alive and unconstrained; these
// are exactly the vertices the one-step map sums over.
inline std::vector<int> free_neighbors(const Hypergraph& graph,
                                       const ConstraintSet& beta,
                                       const VertexMask& deleted, int v) {
  std::vector<int> out;
  for (int u : graph.neighbors(v)) {
    if (vertex_deleted(deleted, u)) continue;
    if (beta.constrained(u)) continue;
    out.push_back(u);
  }
  return out;
}

// How each position of an incident edge is filled during the one-step sum.
struct EdgeSlot {
  enum Kind { query, neighbor, pinned };
  Kind kind = pinned;
  int value = 0;  // neighbor: index into the free-neighbor list; pinned: level
};

struct EdgePlan {
  int edge = 0;
  std::vector<EdgeSlot> slots;
};

inline std::vector<EdgePlan> plan_incident_edges(
    const Model& model, const ConstraintSet& beta, const VertexMask& deleted,
    int v, std::span<const int> neighbors) {
  const Hypergraph& g = model.graph();
  std::vector<EdgePlan> plans;
  for (int e : g.incident_edges(v)) {
    if (!edge_alive(g, deleted, e)) continue;
    EdgePlan plan;
    plan.edge = e;
    for (int w : g.edge(e)) {
      EdgeSlot slot;
      if (w == v) {
        slot.kind = EdgeSlot::query;
      } else if (beta.constrained(w)) {
        slot.kind = EdgeSlot::pinned;
        slot.value = beta.level(w);
      } else {
        slot.kind = EdgeSlot::neighbor;
        auto it = std::find(neighbors.begin(), neighbors.end(), w);
        slot.value = static_cast<int>(it - neighbors.begin());
      }
      plan.slots.push_back(slot);
    }
    plans.push_back(std::move(plan));
  }
  return plans;
}

// One-step numerators: for every query level l,
//   num[l] = sum_y prod_j tables[j](y_1..y_{j+1}) * prod_e Phi_e(..)/c_e
// summed in ascending lexicographic order over the free-neighbor levels y.
// The caller divides num[m] by the total to obtain the marginal.
inline void one_step_numerators(const Model& model,
                                std::span<const EdgePlan> plans,
                                std::span<const int> neighbors,
                                const std::vector<std::vector<double>>& tables,
                                std::span<double> num) {
  const int num_levels = model.num_levels();
  const int k = static_cast<int>(neighbors.size());
  std::fill(num.begin(), num.end(), 0.0);
  std::vector<int> y(static_cast<std::size_t>(k), 0);
  std::vector<int> edge_levels;
  while (true) {
    double weight = 1.0;
    std::size_t prefix = 0;
    for (int j = 0; j < k; ++j) {
      prefix = prefix * num_levels + static_cast<std::size_t>(y[j]);
      weight *= tables[static_cast<std::size_t>(j)][prefix];
    }
    for (int l = 0; l < num_levels; ++l) {
      double factor = weight;
      for (const EdgePlan& plan : plans) {
        edge_levels.assign(plan.slots.size(), 0);
        for (std::size_t i = 0; i < plan.slots.size(); ++i) {
          const EdgeSlot& slot = plan.slots[i];
          switch (slot.kind) {
            case EdgeSlot::query: edge_levels[i] = l; break;
            case EdgeSlot::neighbor: edge_levels[i] = y[slot.value]; break;
            case EdgeSlot::pinned: edge_levels[i] = slot.value; break;
          }
        }
        factor *= model.potential(plan.edge)
                      .eval_levels_over_lower(edge_levels, num_levels);
      }
      num[l] += factor;
    }
    int i = k - 1;
    for (; i >= 0; --i) {
      if (++y[i] < num_levels) break;
      y[i] = 0;
    }
    if (i < 0) break;
  }
}

class DecayEngine {
 public:
  DecayEngine(const Model& model, const DecayOptions& opts)
      : model_(model), opts_(opts) {
    if (opts_.threads < 1)
      throw ValidationError("worker count must be >= 1");
  }

  struct TopResult {
    double value = 0.0;
    std::uint64_t recursive_calls = 0;
  };

  TopResult run(int v, int m, int depth, const ConstraintSet& beta) {
    Scratch scratch;
    scratch.beta = beta;
    scratch.deleted.assign(
        static_cast<std::size_t>(model_.graph().vertex_count()), 0);
    TopResult result;
    if (opts_.threads > 1 && depth > 0) {
      result = run_parallel(scratch, v, m, depth);
    } else {
      result.value = estimate(scratch, v, m, depth);
      result.recursive_calls = scratch.calls;
    }
    return result;
  }

 private:
  struct Scratch {
    ConstraintSet beta{1};
    VertexMask deleted;
    std::uint64_t calls = 0;
    std::unordered_map<std::string, double> cache;
  };

  const Model& model_;
  DecayOptions opts_;

  // Cache key: everything the estimate is a pure function of.
  std::string cache_key(const Scratch& s, int v, int m, int depth) const {
    std::string key;
    key.reserve(s.deleted.size() * 4 + 24);
    key += std::to_string(v);
    key += '/';
    key += std::to_string(m);
    key += '/';
    key += std::to_string(depth);
    for (std::size_t u = 0; u < s.deleted.size(); ++u) {
      key += '|';
      if (s.deleted[u]) {
        key += 'x';
      } else if (s.beta.constrained(static_cast<int>(u))) {
        key += std::to_string(s.beta.level(static_cast<int>(u)));
      }
    }
    return key;
  }

  double counted(Scratch& s, int v, int m, int depth) {
    ++s.calls;
    if (!opts_.use_cache) return estimate(s, v, m, depth);
    std::string key = cache_key(s, v, m, depth);
    auto it = s.cache.find(key);
    if (it != s.cache.end()) return it->second;
    double value = estimate(s, v, m, depth);
    s.cache.emplace(std::move(key), value);
    return value;
  }

  static double clamp_unit(double x) { return std::clamp(x, 0.0, 1.0); }

  double estimate(Scratch& s, int v, int m, int depth) {
    const int num_levels = model_.num_levels();
    if (depth == 0) return 1.0 / num_levels;
    std::vector<int> neighbors =
        free_neighbors(model_.graph(), s.beta, s.deleted, v);
    const int k = static_cast<int>(neighbors.size());

    std::vector<std::vector<double>> tables(static_cast<std::size_t>(k));
    s.deleted[static_cast<std::size_t>(v)] = 1;
    std::vector<int> y;
    for (int j = 0; j < k; ++j) {
      std::size_t size = level_table_size(j + 1, num_levels);
      tables[static_cast<std::size_t>(j)].assign(size, 0.0);
      y.assign(static_cast<std::size_t>(j) + 1, 0);
      for (std::size_t idx = 0; idx < size; ++idx) {
        decode_levels(idx, num_levels, y);
        for (int t = 0; t < j; ++t)
          s.beta.pin(neighbors[static_cast<std::size_t>(t)],
                     y[static_cast<std::size_t>(t)]);
        double r = counted(s, neighbors[static_cast<std::size_t>(j)],
                           y[static_cast<std::size_t>(j)], depth - 1);
        for (int t = 0; t < j; ++t)
          s.beta.unpin(neighbors[static_cast<std::size_t>(t)]);
        tables[static_cast<std::size_t>(j)][idx] = clamp_unit(r);
      }
    }
    s.deleted[static_cast<std::size_t>(v)] = 0;

    return evaluate_one_step(s, v, m, neighbors, tables);
  }

  double evaluate_one_step(const Scratch& s, int v, int m,
                           std::span<const int> neighbors,
                           const std::vector<std::vector<double>>& tables) {
    const int num_levels = model_.num_levels();
    std::vector<EdgePlan> plans =
        plan_incident_edges(model_, s.beta, s.deleted, v, neighbors);
    std::vector<double> num(static_cast<std::size_t>(num_levels), 0.0);
    one_step_numerators(model_, plans, neighbors, tables, num);
    double total = 0.0;
    for (double x : num) total += x;
    return num[static_cast<std::size_t>(m)] / total;
  }

  // Same computation as estimate(), with the first level of the table fill
  // spread over workers. Every entry is a pure function of its arguments and
  // lands in its own slot, and the final one-step evaluation runs in a fixed
  // order, so the result is identical for any worker count.
  TopResult run_parallel(Scratch& s, int v, int m, int depth) {
    const int num_levels = model_.num_levels();
    std::vector<int> neighbors =
        free_neighbors(model_.graph(), s.beta, s.deleted, v);
    const int k = static_cast<int>(neighbors.size());

    std::vector<std::pair<int, std::size_t>> items;  // (j, table index)
    std::vector<std::vector<double>> tables(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
      std::size_t size = level_table_size(j + 1, num_levels);
      tables[static_cast<std::size_t>(j)].assign(size, 0.0);
      for (std::size_t idx = 0; idx < size; ++idx) items.emplace_back(j, idx);
    }

    int workers = opts_.threads;
    if (static_cast<std::size_t>(workers) > items.size())
      workers = static_cast<int>(items.size());
    if (workers < 1) workers = 1;
    std::vector<std::uint64_t> worker_calls(
        static_cast<std::size_t>(workers), 0);
    auto fill_range = [&](int w, std::size_t begin, std::size_t end) {
      Scratch local;
      local.beta = s.beta;
      local.deleted = s.deleted;
      local.deleted[static_cast<std::size_t>(v)] = 1;
      std::vector<int> y;
      for (std::size_t i = begin; i < end; ++i) {
        auto [j, idx] = items[i];
        y.assign(static_cast<std::size_t>(j) + 1, 0);
        decode_levels(idx, num_levels, y);
        for (int t = 0; t < j; ++t)
          local.beta.pin(neighbors[static_cast<std::size_t>(t)],
                         y[static_cast<std::size_t>(t)]);
        double r = counted(local, neighbors[static_cast<std::size_t>(j)],
                           y[static_cast<std::size_t>(j)], depth - 1);
        for (int t = 0; t < j; ++t)
          local.beta.unpin(neighbors[static_cast<std::size_t>(t)]);
        tables[static_cast<std::size_t>(j)][idx] = clamp_unit(r);
      }
      worker_calls[static_cast<std::size_t>(w)] = local.calls;
    };

    std::vector<std::thread> pool;
    std::size_t per = items.size() / static_cast<std::size_t>(workers);
    std::size_t extra = items.size() % static_cast<std::size_t>(workers);
    std::size_t begin = 0;
    for (int w = 0; w < workers; ++w) {
      std::size_t len = per + (static_cast<std::size_t>(w) < extra ? 1 : 0);
      pool.emplace_back(fill_range, w, begin, begin + len);
      begin += len;
    }
    for (auto& t : pool) t.join();

    TopResult result;
    result.value = evaluate_one_step(s, v, m, neighbors, tables);
    for (std::uint64_t c : worker_calls) result.recursive_calls += c;
    return result;
  }
};

inline void check_query(const Model& model, int v, int m,
                        const ConstraintSet& beta) {
  check_constraints(model, beta);
  if (v < 0 || v >= model.graph().vertex_count())
    throw ValidationError("vertex index out of range");
  if (beta.constrained(v))
    throw ValidationError("vertex " + std::to_string(v) +
                          " is already constrained");
  if (m < 0 || m >= model.num_levels())
    throw ValidationError("level outside [0, N)");
}

}  // namespace detail

// One application of the marginal map at v, using the supplied conditional
// marginal estimates for its free neighbors. With exact conditionals this
// reproduces the exact marginal of v.
inline double g_m_eval(const Model& model, int v, const ConstraintSet& beta,
                       int m, const ConditionalMarginals& cm) {
  detail::check_query(model, v, m, beta);
  std::vector<int> neighbors =
      detail::free_neighbors(model.graph(), beta, {}, v);
  if (cm.num_levels != model.num_levels())
    throw ValidationError("conditional tables use a different level count");
  if (cm.neighbor_order != neighbors)
    throw ValidationError(
        "conditional tables do not match the free neighbors of the query "
        "vertex");
  if (cm.tables.size() != neighbors.size())
    throw ValidationError("expected one table per free neighbor");
  for (std::size_t j = 0; j < cm.tables.size(); ++j)
    if (cm.tables[j].size() !=
        detail::level_table_size(static_cast<int>(j) + 1, model.num_levels()))
      throw ValidationError("conditional table " + std::to_string(j) +
                            " has the wrong size");

  std::vector<detail::EdgePlan> plans =
      detail::plan_incident_edges(model, beta, {}, v, neighbors);
  std::vector<double> num(static_cast<std::size_t>(model.num_levels()), 0.0);
  detail::one_step_numerators(model, plans, neighbors, cm.tables, num);
  double total = 0.0;
  for (double x : num) total += x;
  return num[static_cast<std::size_t>(m)] / total;
}

// Exact conditional marginals of the free neighbors of v, computed by the
// brute-force oracle on the graph with v removed. Feeding these to g_m_eval
// recovers marginal_exact(v); tests lean on that identity.
inline ConditionalMarginals exact_conditional_marginals(
    const Model& model, int v, const ConstraintSet& beta,
    const OracleOptions& opts = {}) {
  detail::check_query(model, v, 0, beta);
  ConditionalMarginals cm;
  cm.num_levels = model.num_levels();
  cm.neighbor_order = detail::free_neighbors(model.graph(), beta, {}, v);
  VertexMask deleted(static_cast<std::size_t>(model.graph().vertex_count()),
                     0);
  deleted[static_cast<std::size_t>(v)] = 1;
  const int k = static_cast<int>(cm.neighbor_order.size());
  cm.tables.resize(static_cast<std::size_t>(k));
  std::vector<int> y;
  ConstraintSet pinned(beta);
  for (int j = 0; j < k; ++j) {
    std::size_t size = detail::level_table_size(j + 1, cm.num_levels);
    cm.tables[static_cast<std::size_t>(j)].assign(size, 0.0);
    y.assign(static_cast<std::size_t>(j) + 1, 0);
    for (std::size_t idx = 0; idx < size; ++idx) {
      detail::decode_levels(idx, cm.num_levels, y);
      for (int t = 0; t < j; ++t)
        pinned.pin(cm.neighbor_order[static_cast<std::size_t>(t)],
                   y[static_cast<std::size_t>(t)]);
      cm.tables[static_cast<std::size_t>(j)][idx] = marginal_exact(
          model, cm.neighbor_order[static_cast<std::size_t>(j)],
          y[static_cast<std::size_t>(j)], pinned, deleted, opts);
      for (int t = 0; t < j; ++t)
        pinned.unpin(cm.neighbor_order[static_cast<std::size_t>(t)]);
    }
  }
  return cm;
}

// Depth-d recursive marginal estimate for v at level m under beta.
inline DecayEstimate approx_prob(const Model& model, int v, int m, int depth,
                                 const ConstraintSet& beta,
                                 const DecayOptions& opts = {}) {
  detail::check_query(model, v, m, beta);
  if (depth < 0) throw ValidationError("depth must be >= 0");
  detail::DecayEngine engine(model, opts);
  auto top = engine.run(v, m, depth, beta);
  DecayEstimate est;
  est.value = top.value;
  est.depth = depth;
  est.error_bound = std::pow(1.0 - model.delta(), depth);
  est.recursive_calls = top.recursive_calls;
  return est;
}

// Smallest depth at which the per-step error sqrt(2) N (1-delta)^d drops to
// 1/n^2, so the n-step telescoping stays within (1 + 1/n^2)^n - 1 overall.
inline int choose_depth(double delta, int num_levels, int vertex_count) {
  if (num_levels < 1) throw ValidationError("level count must be >= 1");
  if (vertex_count < 1) throw ValidationError("vertex count must be >= 1");
  if (!(delta > 0.0) || delta >= 1.0)
    throw ValidationError(
        "depth selection needs a decay margin delta in (0, 1); pass an "
        "explicit depth instead");
  double n = static_cast<double>(vertex_count);
  double base = std::sqrt(2.0) * num_levels;
  double target = 1.0 / (n * n);
  int d = std::max(
      1, static_cast<int>(std::ceil(std::log(base * n * n) /
                                    -std::log1p(-delta))));
  while (base * std::pow(1.0 - delta, d) > target) ++d;
  return d;
}

inline int choose_depth(const Model& model) {
  return choose_depth(model.delta(), model.num_levels(),
                      model.graph().vertex_count());
}

// Closed-form ceiling on the recursive calls beneath one depth-d estimate:
// S^d with S = sum_{j=1..eta} N^j. Returned as a double since it overflows
// integers quickly; it is a feasibility gauge, not an exact count.
inline double call_count_estimate(const Model& model, int depth) {
  if (depth < 0) throw ValidationError("depth must be >= 0");
  double s = 0.0;
  double power = 1.0;
  for (int j = 1; j <= model.graph().max_neighbor_count(); ++j) {
    power *= model.num_levels();
    s += power;
  }
  return std::pow(s, static_cast<double>(depth));
}

// Telescoping estimate of Z: pin vertices to level 0 one at a time, estimate
// each pinned marginal at the given depth, and divide them out of f(0).
inline ZEstimate approx_z(const Model& model, int depth,
                          const DecayOptions& opts = {}) {
  if (depth < 1) throw ValidationError("depth must be >= 1");
  const int n = model.graph().vertex_count();
  const int num_levels = model.num_levels();

  std::vector<int> zeros(static_cast<std::size_t>(n), 0);
  double log_f0 = log_f_eval(model, zeros);

  detail::DecayEngine engine(model, opts);
  ConstraintSet beta(n);
  ZEstimate est;
  est.depth = depth;
  est.delta = model.delta();
  double log_product = 0.0;
  for (int v = 0; v < n; ++v) {
    auto top = engine.run(v, 0, depth, beta);
    est.step_values.push_back(top.value);
    est.recursive_calls += top.recursive_calls;
    log_product += std::log(top.value);
    beta.pin(v, 0);
  }
  est.log_value = log_f0 - log_product;
  est.value = std::exp(est.log_value);
  est.per_step_error =
      std::sqrt(2.0) * num_levels * std::pow(1.0 - est.delta, depth);
  est.per_step_lower = 1.0 / (std::sqrt(2.0) * num_levels);
  est.rel_error_bound =
      est.per_step_error < 1.0
          ? std::pow(1.0 + est.per_step_error, n) - 1.0
          : std::numeric_limits<double>::infinity();
  return est;
}

}  // namespace cdint
