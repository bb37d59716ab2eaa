#pragma once

#include <cstdint>
#include <vector>

#include "gwbounds/oracle/rng.hpp"

struct RandomProfile {
  std::vector<double> weights;
  std::vector<double> variances;
  double delta = 0.0;
};

/// Profiles with 1..4 letters, variances in (0, 2], and delta strictly below
/// E[Var(X|W)]; one in eight has a zero-variance letter.
inline std::vector<RandomProfile> random_profiles(std::size_t count, std::uint64_t seed) {
  gwbounds::oracle::Philox4x32 rng(seed, 0);
  std::vector<RandomProfile> out;
  while (out.size() < count) {
    RandomProfile p;
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 4.0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p.weights.push_back(0.05 + rng.uniform());
      total += p.weights.back();
      p.variances.push_back(0.01 + 1.99 * rng.uniform());
    }
    if (n > 1 && rng.uniform() < 0.125) p.variances[0] = 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      p.weights[i] /= total;
      acc += p.weights[i];
    }
    p.weights[n - 1] = 1.0 - acc;
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += p.weights[i] * p.variances[i];
    p.delta = mean * (0.02 + 0.96 * rng.uniform());
    if (p.delta <= 0.0) continue;
    out.push_back(p);
  }
  return out;
}
