#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>

namespace gwbounds {

// All rates and entropies are in nats.
inline constexpr double kTwoPiE = 2.0 * std::numbers::pi * std::numbers::e;

/// max(ln x, 0); a non-positive argument clamps to zero as well.
inline double log_plus(double x) {
  if (!(x > 1.0)) return 0.0;
  return std::log(x);
}

/// Pairwise (tree) summation. Deterministic for a given input order and
/// accurate to O(log n) ulps.
inline double pairwise_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

/// Converts a rate in nats to bits. Output-only; never feed the result back
/// into a computation.
inline double nats_to_bits(double nats) { return nats / std::numbers::ln2; }

/// ln(sum_i exp(a_i)) without overflow.
inline double log_sum_exp(std::span<const double> a) {
  if (a.empty()) return -INFINITY;
  const double m = *std::max_element(a.begin(), a.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : a) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace gwbounds
