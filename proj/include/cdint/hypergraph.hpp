#pragma once

#include <algorithm>
#include <cassert>
#include <string>
#include <vector>

#include "cdint/errors.hpp"

namespace cdint {

// Undirected hypergraph on vertices 0..n-1. Immutable after construction.
// Derived structure (degrees, neighbor lists, incident-edge lists, the
// constants Delta / eta / R) is computed once; every list is ordered by
// ascending index so downstream sweeps are reproducible.
class Hypergraph {
public:
  Hypergraph(int vertex_count, std::vector<std::vector<int>> edges)
      : vertex_count_(vertex_count), edges_(std::move(edges)) {
    if (vertex_count_ < 1)
      throw ValidationError("hypergraph needs a positive vertex count, got " +
                            std::to_string(vertex_count_));
    degrees_.assign(vertex_count_, 0);
    neighbors_.assign(vertex_count_, {});
    incident_.assign(vertex_count_, {});

    for (std::size_t e = 0; e < edges_.size(); ++e) {
      const auto& edge = edges_[e];
      if (edge.empty())
        throw ValidationError("edge " + std::to_string(e) + " is empty");
      for (int v : edge) {
        if (v < 0 || v >= vertex_count_)
          throw ValidationError("edge " + std::to_string(e) +
                                " references vertex " + std::to_string(v) +
                                " outside [0, " +
                                std::to_string(vertex_count_) + ")");
      }
      std::vector<int> sorted(edge);
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ValidationError("edge " + std::to_string(e) +
                              " contains a duplicate vertex");
      max_edge_size_ = std::max<int>(max_edge_size_, edge.size());
      for (int v : edge) {
        ++degrees_[v];
        incident_[v].push_back(static_cast<int>(e));
        for (int u : edge)
          if (u != v) neighbors_[v].push_back(u);
      }
    }

    for (int v = 0; v < vertex_count_; ++v) {
      auto& nb = neighbors_[v];
      std::sort(nb.begin(), nb.end());
      nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
      max_degree_ = std::max(max_degree_, degrees_[v]);
      max_neighbor_count_ = std::max<int>(max_neighbor_count_, nb.size());
    }
    // eta <= R * Delta always holds for the computed constants.
    assert(max_neighbor_count_ <= max_edge_size_ * max_degree_);
  }

  int vertex_count() const noexcept { return vertex_count_; }
  int edge_count() const noexcept { return static_cast<int>(edges_.size()); }
  const std::vector<std::vector<int>>& edges() const noexcept { return edges_; }
  const std::vector<int>& edge(int e) const { return edges_[e]; }

  /// Delta: maximum number of edges any vertex belongs to.
  int max_degree() const noexcept { return max_degree_; }
  /// eta: maximum number of distinct neighbors of any vertex.
  int max_neighbor_count() const noexcept { return max_neighbor_count_; }
  /// R: maximum edge cardinality (0 for an edgeless graph).
  int max_edge_size() const noexcept { return max_edge_size_; }

  int degree(int v) const { return degrees_[v]; }
  const std::vector<int>& neighbors(int v) const { return neighbors_[v]; }
  const std::vector<int>& incident_edges(int v) const { return incident_[v]; }

  // Connected in the usual sense (single vertex counts as connected).
  bool is_connected() const {
    if (vertex_count_ == 1) return true;
    std::vector<char> seen(vertex_count_, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int u : neighbors_[v]) {
        if (!seen[u]) {
          seen[u] = 1;
          ++reached;
          stack.push_back(u);
        }
      }
    }
    return reached == vertex_count_;
  }

private:
  int vertex_count_;
  std::vector<std::vector<int>> edges_;
  std::vector<int> degrees_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<std::vector<int>> incident_;
  int max_degree_ = 0;
  int max_neighbor_count_ = 0;
  int max_edge_size_ = 0;
};

}  // namespace cdint
