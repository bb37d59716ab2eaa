#pragma once

// Entropy-power and variance bounds on scalar and conditional rate-distortion functions under
// MSE, together with the machinery behind the conditional upper bound: the
// water-level distortion allocation over the letters of a discrete
// conditioning variable and the additive Gaussian test channel.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gwbounds/error.hpp"
#include "gwbounds/numeric.hpp"

namespace gwbounds {

namespace detail {

inline void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw Error(ErrorKind::NonPositiveInput,
                std::string(what) + " must be positive and finite");
  }
}

inline double half_log_plus_ratio(double num, double den) {
  return 0.5 * log_plus(num / den);
}

}  // namespace detail

/// Shannon lower bound: 1/2 log+ (N(X) / delta).
inline double rd_lower(double entropy_power, double delta) {
  detail::require_positive(entropy_power, "entropy power");
  detail::require_positive(delta, "delta");
  return detail::half_log_plus_ratio(entropy_power, delta);
}

/// Gaussian test-channel upper bound: 1/2 log+ (Var(X) / delta).
inline double rd_upper(double variance, double delta) {
  detail::require_positive(variance, "variance");
  detail::require_positive(delta, "delta");
  return detail::half_log_plus_ratio(variance, delta);
}

/// Lower bound on R_{X|Y}: 1/2 log+ (N(X|Y) / delta).
inline double cond_rd_lower(double conditional_entropy_power, double delta) {
  detail::require_positive(conditional_entropy_power,
                           "conditional entropy power");
  detail::require_positive(delta, "delta");
  return detail::half_log_plus_ratio(conditional_entropy_power, delta);
}

struct ProfileEntry {
  double weight = 0.0;    // p(w_i)
  double variance = 0.0;  // Var(X | W = w_i)
  std::size_t index = 0;  // position in the caller's input
};

/// The law of Var(X|W) over a discrete conditioning alphabet. Entries are
/// kept sorted ascending by variance, ties broken by input position.
class ConditionalVarianceProfile {
 public:
  ConditionalVarianceProfile(std::span<const double> weights,
                             std::span<const double> variances) {
    if (weights.empty()) {
      throw Error(ErrorKind::EmptyProfile, "profile has no letters");
    }
    if (weights.size() != variances.size()) {
      throw Error(ErrorKind::BadPmf,
                  "weights and variances differ in length");
    }
    double total = 0.0;
    entries_.reserve(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
        throw Error(ErrorKind::BadPmf, "weights must be non-negative");
      }
      if (!(variances[i] >= 0.0) || !std::isfinite(variances[i])) {
        throw Error(ErrorKind::NonPositiveInput,
                    "conditional variances must be non-negative");
      }
      total += weights[i];
      entries_.push_back({weights[i], variances[i], i});
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw Error(ErrorKind::BadPmf, "weights sum to " +
                                         std::to_string(total) + ", not 1");
    }
    std::stable_sort(entries_.begin(), entries_.end(),
                     [](const ProfileEntry& a, const ProfileEntry& b) {
                       return a.variance < b.variance;
                     });
  }

  std::span<const ProfileEntry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  /// E[Var(X|W)].
  double mean_variance() const {
    double s = 0.0;
    for (const auto& e : entries_) s += e.weight * e.variance;
    return s;
  }

  /// N(X|W) when every conditional law is Gaussian: exp E[ln Var(X|W)].
  double gaussian_entropy_power() const {
    double s = 0.0;
    for (const auto& e : entries_) {
      if (e.weight == 0.0) continue;
      if (e.variance == 0.0) return 0.0;
      s += e.weight * std::log(e.variance);
    }
    return std::exp(s);
  }

 private:
  std::vector<ProfileEntry> entries_;
};

struct AllocationResult {
  /// Delta_{w_i}, aligned with profile.entries() (sorted order).
  std::vector<double> per_letter_delta;
  /// Final water level.
  double gamma = 0.0;
  /// Number of leading letters with Delta_{w_i} = Var(X|W = w_i).
  std::size_t clamp_count = 0;
  /// E[1/2 log+ Var(X|W) / Delta_W] at the allocation.
  double achieved_rate = 0.0;
  /// Set when delta >= E[Var(X|W)]: nothing to code, every letter clamped.
  bool surplus = false;
  double surplus_amount = 0.0;
};

/// Distributes the distortion budget over the conditioning letters.
///
/// Starts with the water level at delta and, while some unclamped letter has
/// a variance below the level, clamps the next letter in ascending order and
/// recomputes the level from the clamped prefix. Letters with zero variance
/// start out clamped.
inline AllocationResult allocate_distortion(
    const ConditionalVarianceProfile& profile, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw Error(ErrorKind::NegativeDelta, "delta must be positive");
  }
  const auto entries = profile.entries();
  const std::size_t n = entries.size();
  AllocationResult out;
  out.per_letter_delta.resize(n);

  const double total = profile.mean_variance();
  if (delta >= total) {
    for (std::size_t i = 0; i < n; ++i) {
      out.per_letter_delta[i] = entries[i].variance;
    }
    out.gamma = entries.back().variance;
    out.clamp_count = n;
    out.achieved_rate = 0.0;
    out.surplus = delta > total;
    out.surplus_amount = delta - total;
    return out;
  }

  auto below_level = [](double level, double variance) {
    return level > variance + 1e-12 * std::max(1.0, variance);
  };
  // gamma = (delta - sum_{i<k} p_i Var_i) / (sum_{i>=k} p_i), both sums
  // taken from scratch.
  auto level_for = [&](std::size_t k) {
    double clamped = 0.0;
    double open_weight = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      clamped += entries[i].weight * entries[i].variance;
    }
    for (std::size_t i = k; i < n; ++i) open_weight += entries[i].weight;
    return (delta - clamped) / open_weight;
  };

  std::size_t k = 0;
  while (k < n && entries[k].variance == 0.0) ++k;
  double gamma = level_for(k);
  while (k < n) {
    bool violated = false;
    for (std::size_t i = k; i < n; ++i) {
      if (below_level(gamma, entries[i].variance)) {
        violated = true;
        break;
      }
    }
    if (!violated) break;
    ++k;
    gamma = level_for(k);
  }

  double rate = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i < k) {
      out.per_letter_delta[i] = entries[i].variance;
    } else {
      out.per_letter_delta[i] = gamma;
      rate += 0.5 * entries[i].weight * log_plus(entries[i].variance / gamma);
    }
  }
  out.gamma = gamma;
  out.clamp_count = k;
  out.achieved_rate = rate;
  return out;
}

struct ConditionalUpperBound {
  /// 1/2 log+ (E[Var(X|W)] / delta).
  double bound = 0.0;
  /// E[1/2 log+ Var(X|W) / Delta_W] at the optimal allocation; never
  /// larger than bound.
  double intermediate = 0.0;
  AllocationResult allocation;
};

inline ConditionalUpperBound cond_rd_upper(
    const ConditionalVarianceProfile& profile, double delta) {
  ConditionalUpperBound out;
  out.allocation = allocate_distortion(profile, delta);
  out.intermediate = out.allocation.achieved_rate;
  const double mean_var = profile.mean_variance();
  out.bound = mean_var > 0.0
                  ? detail::half_log_plus_ratio(mean_var, delta)
                  : 0.0;
  if (out.intermediate > out.bound + 1e-12) {
    throw std::logic_error("allocation rate exceeds the conditional upper bound");
  }
  return out;
}

/// X_hat = alpha (X_w + Z_w) with Z_w ~ N(0, noise_variance) independent of
/// X_w, tuned so that E[(X_w - X_hat)^2] = delta.
struct TestChannel {
  double variance = 0.0;
  double delta = 0.0;
  double alpha = 0.0;
  double noise_variance = 0.0;

  /// (1 - alpha)^2 Var(X_w) + alpha^2 Var(Z_w).
  double distortion() const {
    const double one_minus = 1.0 - alpha;
    return one_minus * one_minus * variance + alpha * alpha * noise_variance;
  }

  /// I(X_w; X_hat) when X_w is Gaussian: 1/2 ln((Var + Var Z) / Var Z).
  double mutual_information() const {
    return 0.5 * std::log((variance + noise_variance) / noise_variance);
  }
};

inline TestChannel build_test_channel(double variance, double delta_w) {
  detail::require_positive(variance, "variance");
  if (!(delta_w > 0.0) || !(delta_w < variance)) {
    throw Error(ErrorKind::DeltaNotBelowVariance,
                "test channel needs 0 < delta_w < Var(X_w)");
  }
  TestChannel ch;
  ch.variance = variance;
  ch.delta = delta_w;
  ch.alpha = (variance - delta_w) / variance;
  ch.noise_variance = variance * delta_w / (variance - delta_w);
  return ch;
}

}  // namespace gwbounds
