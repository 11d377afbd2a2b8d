#pragma once

#include <string>
#include <vector>

#include "cdint/errors.hpp"

namespace cdint {

// Partial assignment of vertices to discrete levels ("v <- m" constraints).
// Levels are validated against the model's grid at the operation boundary;
// the set itself only guarantees each vertex is pinned at most once.
class ConstraintSet {
public:
  static constexpr int kFree = -1;

  ConstraintSet() = default;
  explicit ConstraintSet(int vertex_count) : level_(vertex_count, kFree) {}

  int vertex_count() const noexcept { return static_cast<int>(level_.size()); }
  int constrained_count() const noexcept { return count_; }
  bool constrained(int v) const { return level_.at(v) != kFree; }
  int level(int v) const { return level_.at(v); }

  void pin(int v, int m) {
    if (m < 0)
      throw ValidationError("constraint level must be nonnegative, got " +
                            std::to_string(m));
    int& slot = level_.at(v);
    if (slot != kFree)
      throw ValidationError("vertex " + std::to_string(v) +
                            " is already constrained");
    slot = m;
    ++count_;
  }

  void unpin(int v) {
    int& slot = level_.at(v);
    if (slot == kFree)
      throw ValidationError("vertex " + std::to_string(v) +
                            " is not constrained");
    slot = kFree;
    --count_;
  }

  bool operator==(const ConstraintSet&) const = default;

private:
  std::vector<int> level_;
  int count_ = 0;
};

}  // namespace cdint
