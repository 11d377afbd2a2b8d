#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>

namespace cdint {

// Streaming log-sum-exp. Terms are folded in insertion order with a running
// maximum, so the result is bit-stable for a fixed insertion order and never
// overflows for finite inputs. An empty accumulator is log(0) = -inf.
class LogSumAccumulator {
public:
  void add(double log_term) {
    ++count_;
    if (std::isinf(log_term) && log_term < 0) return;  // exp(-inf) = 0
    if (log_term <= max_) {
      sum_ += std::exp(log_term - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - log_term) + 1.0;
      max_ = log_term;
    }
  }

  double log_sum() const {
    if (sum_ == 0.0) return -std::numeric_limits<double>::infinity();
    return max_ + std::log(sum_);
  }

  std::uint64_t count() const noexcept { return count_; }

private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
  std::uint64_t count_ = 0;
};

// Van der Corput radical inverse; halton_point fills one low-discrepancy
// sample in [0,1)^dim. Deterministic, used for gradient spot checks.
inline double radical_inverse(std::uint64_t index, int base) {
  double inv = 1.0 / base;
  double scale = inv;
  double value = 0.0;
  while (index > 0) {
    value += static_cast<double>(index % base) * scale;
    index /= base;
    scale *= inv;
  }
  return value;
}

inline void halton_point(std::uint64_t index, std::span<double> out) {
  static constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = radical_inverse(index + 1, kPrimes[i % 10]);
}

// FNV-1a 64-bit hash, used to fingerprint input files in run reports.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace cdint
