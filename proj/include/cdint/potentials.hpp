#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cdint/errors.hpp"
#include "cdint/numeric.hpp"

namespace cdint {

enum class PotentialFamily { table, exp_bilinear, callable };

inline const char* family_name(PotentialFamily f) {
  switch (f) {
    case PotentialFamily::table: return "table";
    case PotentialFamily::exp_bilinear: return "exp-bilinear";
    case PotentialFamily::callable: return "generic-callable";
  }
  return "?";
}

// One edge potential: a positive bounded function on [0,1]^arity.
//
// Families:
//   table          one positive value per grid point of a fixed N-level grid,
//                  indexed lexicographically; exactly checkable, no
//                  continuous counterpart.
//   exp_bilinear   c * exp(eps * prod_i y_i) with eps >= 0; upper factor
//                  e^eps, gradient bound eps * e^eps * sqrt(arity).
//   callable       arbitrary positive function with declared lower bound,
//                  upper factor and gradient bound; verification of the
//                  declarations is by sampling only.
class Potential {
public:
  using Fn = std::function<double(std::span<const double>)>;

  static Potential table(int arity, int num_levels, std::vector<double> values) {
    if (arity < 1) throw ValidationError("table potential needs arity >= 1");
    if (num_levels < 1)
      throw ValidationError("table potential needs num_levels >= 1");
    double expected = std::pow(static_cast<double>(num_levels), arity);
    if (expected > 1e9 || values.size() != static_cast<std::size_t>(expected))
      throw ValidationError(
          "table potential with arity " + std::to_string(arity) + " and " +
          std::to_string(num_levels) + " levels needs N^r = " +
          std::to_string(static_cast<long long>(expected)) + " values, got " +
          std::to_string(values.size()));
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (double v : values) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw ValidationError("table potential values must be positive finite");
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    Potential p;
    p.family_ = PotentialFamily::table;
    p.arity_ = arity;
    p.table_levels_ = num_levels;
    p.values_ = std::move(values);
    p.lower_ = lo;
    p.upper_factor_ = hi / lo;
    return p;
  }

  static Potential exp_bilinear(int arity, double c, double epsilon) {
    if (arity < 1) throw ValidationError("exp-bilinear potential needs arity >= 1");
    if (!(c > 0.0) || !std::isfinite(c))
      throw ValidationError("exp-bilinear potential needs c > 0");
    if (epsilon < 0.0 || !std::isfinite(epsilon))
      throw ValidationError("exp-bilinear potential needs epsilon >= 0");
    Potential p;
    p.family_ = PotentialFamily::exp_bilinear;
    p.arity_ = arity;
    p.lower_ = c;
    p.epsilon_ = epsilon;
    p.upper_factor_ = std::exp(epsilon);
    p.gradient_bound_ = epsilon * std::exp(epsilon) * std::sqrt(arity);
    return p;
  }

  static Potential callable(int arity, Fn fn, double lower, double upper_factor,
                            double gradient_bound) {
    if (arity < 1) throw ValidationError("callable potential needs arity >= 1");
    if (!fn) throw ValidationError("callable potential needs a function");
    if (!(lower > 0.0))
      throw ValidationError("callable potential needs a positive lower bound");
    if (upper_factor < 1.0)
      throw ValidationError("callable potential needs upper_factor >= 1");
    if (gradient_bound < 0.0)
      throw ValidationError("callable potential needs gradient_bound >= 0");
    Potential p;
    p.family_ = PotentialFamily::callable;
    p.arity_ = arity;
    p.fn_ = std::move(fn);
    p.lower_ = lower;
    p.upper_factor_ = upper_factor;
    p.gradient_bound_ = gradient_bound;
    return p;
  }

  PotentialFamily family() const noexcept { return family_; }
  int arity() const noexcept { return arity_; }
  bool has_continuous_form() const noexcept {
    return family_ != PotentialFamily::table;
  }

  /// c_e: exact minimum for tables, declared lower bound otherwise.
  double lower_bound() const noexcept { return lower_; }
  /// sup Phi / c_e: exact for tables, analytic or declared otherwise.
  double upper_factor() const noexcept { return upper_factor_; }

  /// k_e with ||grad Phi||_2 <= k_e * c_e on [0,1]^arity.
  double gradient_bound() const {
    if (family_ == PotentialFamily::table)
      throw ValidationError(
          "table potential has no continuous counterpart (no gradient bound)");
    return gradient_bound_;
  }

  /// For tables, the grid resolution the values are bound to; 0 otherwise.
  int table_num_levels() const noexcept { return table_levels_; }
  const std::vector<double>& table_values() const { return values_; }

  double eval(std::span<const double> point) const {
    check_point(point);
    switch (family_) {
      case PotentialFamily::table:
        return values_[grid_index(point)];
      case PotentialFamily::exp_bilinear:
        return lower_ * std::exp(epsilon_ * coord_product(point));
      case PotentialFamily::callable:
        return fn_(point);
    }
    return 0.0;
  }

  double log_eval(std::span<const double> point) const {
    if (family_ == PotentialFamily::exp_bilinear) {
      check_point(point);
      return std::log(lower_) + epsilon_ * coord_product(point);
    }
    return std::log(eval(point));
  }

  // Evaluation at the grid point levels/num_levels. Tables are indexed
  // directly; analytic families are evaluated at the embedded point.
  double log_eval_levels(std::span<const int> levels, int num_levels) const {
    check_levels(levels, num_levels);
    switch (family_) {
      case PotentialFamily::table:
        return std::log(values_[level_index(levels)]);
      case PotentialFamily::exp_bilinear: {
        double prod = 1.0;
        for (int m : levels) prod *= static_cast<double>(m) / num_levels;
        return std::log(lower_) + epsilon_ * prod;
      }
      case PotentialFamily::callable: {
        double buf[kMaxArity];
        return std::log(fn_(embed(levels, num_levels, buf)));
      }
    }
    return 0.0;
  }

  // Phi(levels/num_levels) / c_e in linear form; stays in [1, upper_factor],
  // which keeps products over incident edges well scaled.
  double eval_levels_over_lower(std::span<const int> levels,
                                int num_levels) const {
    check_levels(levels, num_levels);
    switch (family_) {
      case PotentialFamily::table:
        return values_[level_index(levels)] / lower_;
      case PotentialFamily::exp_bilinear: {
        double prod = 1.0;
        for (int m : levels) prod *= static_cast<double>(m) / num_levels;
        return std::exp(epsilon_ * prod);
      }
      case PotentialFamily::callable: {
        double buf[kMaxArity];
        return fn_(embed(levels, num_levels, buf)) / lower_;
      }
    }
    return 0.0;
  }

private:
  static constexpr int kMaxArity = 16;

  Potential() = default;

  void check_point(std::span<const double> point) const {
    if (static_cast<int>(point.size()) != arity_)
      throw ValidationError("potential of arity " + std::to_string(arity_) +
                            " evaluated at a point of dimension " +
                            std::to_string(point.size()));
    for (double x : point)
      if (!(x >= 0.0 && x <= 1.0))
        throw ValidationError("potential evaluated outside [0,1]^r");
  }

  void check_levels(std::span<const int> levels, int num_levels) const {
    if (static_cast<int>(levels.size()) != arity_)
      throw ValidationError("potential of arity " + std::to_string(arity_) +
                            " evaluated at " + std::to_string(levels.size()) +
                            " levels");
    if (family_ == PotentialFamily::table && num_levels != table_levels_)
      throw ValidationError("table potential is bound to N = " +
                            std::to_string(table_levels_) +
                            ", evaluated with N = " +
                            std::to_string(num_levels));
    for (int m : levels)
      if (m < 0 || m >= num_levels)
        throw ValidationError("level " + std::to_string(m) +
                              " outside [0, " + std::to_string(num_levels) +
                              ")");
    if (arity_ > kMaxArity)
      throw ValidationError("potential arity exceeds supported maximum");
  }

  static double coord_product(std::span<const double> point) {
    double prod = 1.0;
    for (double x : point) prod *= x;
    return prod;
  }

  std::size_t level_index(std::span<const int> levels) const {
    std::size_t idx = 0;
    for (int m : levels) idx = idx * table_levels_ + static_cast<std::size_t>(m);
    return idx;
  }

  // Maps a continuous point onto the grid; off-grid points are an error
  // because a table has no values between grid points.
  std::size_t grid_index(std::span<const double> point) const {
    std::size_t idx = 0;
    for (double x : point) {
      double scaled = x * table_levels_;
      int m = static_cast<int>(std::lround(scaled));
      if (std::abs(scaled - m) > 1e-9 || m < 0 || m >= table_levels_)
        throw ValidationError(
            "table potential evaluated at off-grid coordinate " +
            std::to_string(x) + " (grid points are m/N, m in [0, N))");
      idx = idx * table_levels_ + static_cast<std::size_t>(m);
    }
    return idx;
  }

  std::span<const double> embed(std::span<const int> levels, int num_levels,
                                double* buf) const {
    for (std::size_t i = 0; i < levels.size(); ++i)
      buf[i] = static_cast<double>(levels[i]) / num_levels;
    return {buf, levels.size()};
  }

  PotentialFamily family_ = PotentialFamily::table;
  int arity_ = 0;
  int table_levels_ = 0;
  std::vector<double> values_;
  double lower_ = 1.0;
  double upper_factor_ = 1.0;
  double epsilon_ = 0.0;
  double gradient_bound_ = 0.0;
  Fn fn_;
};

// Largest central-difference gradient norm, divided by the lower bound,
// observed over deterministic low-discrepancy samples of the open domain.
// The near-(1,...,1) corner is always included since monotone families peak
// there. Throws for tables.
inline double sampled_gradient_sup(const Potential& p, int samples = 256,
                                   double step = 1e-5) {
  if (!p.has_continuous_form())
    throw ValidationError(
        "table potential has no continuous counterpart (nothing to sample)");
  const int r = p.arity();
  std::vector<double> point(r), lo(r), hi(r);
  double max_norm = 0.0;
  for (int s = -1; s < samples; ++s) {
    if (s < 0) {
      std::fill(point.begin(), point.end(), 1.0 - step);
    } else {
      halton_point(static_cast<std::uint64_t>(s), point);
      for (double& x : point) x = step + x * (1.0 - 2.0 * step);
    }
    double sq = 0.0;
    for (int i = 0; i < r; ++i) {
      lo.assign(point.begin(), point.end());
      hi.assign(point.begin(), point.end());
      lo[i] -= step;
      hi[i] += step;
      double g = (p.eval(hi) - p.eval(lo)) / (2.0 * step);
      sq += g * g;
    }
    max_norm = std::max(max_norm, std::sqrt(sq));
  }
  return max_norm / p.lower_bound();
}

}  // namespace cdint
