#pragma once

// Brute-force check of the water-level allocation: minimizes
// sum_i p_i/2 log+(Var_i / Delta_i) over a lattice of feasible allocations
// (sum_i p_i Delta_i = delta, 0 <= Delta_i <= Var_i). One letter absorbs the
// equality constraint and the others are enumerated; each letter with positive
// variance takes that role in turn.
// The search starts on a coarse lattice over the whole box and then refines a
// window around the incumbent until the requested step is reached.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "gwbounds/error.hpp"
#include "gwbounds/numeric.hpp"
#include "gwbounds/scalar_rd.hpp"

namespace gwbounds::oracle {

struct AllocationGridResult {
  double rate = 0.0;
  /// Minimizing allocation, aligned with profile.entries().
  std::vector<double> allocation;
  /// First-order change of the objective across one lattice cell at the
  /// minimizer (nats).
  double resolution = 0.0;
  std::size_t evaluations = 0;
};

inline constexpr std::size_t kMaxGridLetters = 4;
inline constexpr double kMaxGridStep = 1e-3;

inline AllocationGridResult allocation_grid_oracle(
    const ConditionalVarianceProfile& profile, double delta, double step) {
  if (!(step > 0.0) || step > kMaxGridStep) {
    throw Error(ErrorKind::GridTooCoarse, "grid step must lie in (0, 1e-3]");
  }
  if (profile.size() > kMaxGridLetters) {
    throw Error(ErrorKind::ProfileTooLarge,
                "grid oracle supports at most 4 letters");
  }
  if (!(delta > 0.0)) {
    throw Error(ErrorKind::NegativeDelta, "delta must be positive");
  }
  const auto entries = profile.entries();
  const std::size_t n = entries.size();
  AllocationGridResult out;
  out.allocation.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.allocation[i] = entries[i].variance;
  if (delta >= profile.mean_variance()) return out;

  auto objective = [&](const std::vector<double>& alloc) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& e = entries[i];
      if (e.weight == 0.0 || e.variance == 0.0) continue;
      if (alloc[i] <= 0.0) return std::numeric_limits<double>::infinity();
      s += 0.5 * e.weight * log_plus(e.variance / alloc[i]);
    }
    return s;
  };

  // Lattice points of one coordinate in [lo, hi] with spacing h, anchored at
  // zero, plus the upper bound itself when it falls inside the window.
  auto axis = [](double lo, double hi, double h, double cap) {
    std::vector<double> pts;
    const auto k0 = static_cast<long long>(std::ceil(std::max(0.0, lo) / h));
    const auto k1 = static_cast<long long>(std::floor(hi / h));
    for (long long k = k0; k <= k1; ++k) {
      pts.push_back(std::min(static_cast<double>(k) * h, cap));
    }
    if (hi >= cap && (pts.empty() || pts.back() < cap)) pts.push_back(cap);
    return pts;
  };

  double max_var = 0.0;
  for (const auto& e : entries) max_var = std::max(max_var, e.variance);

  // Full coarse-to-fine search with letter `dep` solving the constraint.
  // Returns false when no lattice point is feasible.
  auto solve = [&](std::size_t dep, double& best, std::vector<double>& best_alloc,
                   double& resolution) {
    std::vector<std::size_t> free_coords;
    for (std::size_t i = 0; i < n; ++i) {
      if (i != dep && entries[i].weight > 0.0 && entries[i].variance > 0.0) {
        free_coords.push_back(i);
      }
    }
    const std::size_t f = free_coords.size();
    const double p_dep = entries[dep].weight;

    auto complete = [&](std::vector<double>& alloc) {
      double used = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (i != dep) used += entries[i].weight * alloc[i];
      }
      const double d = (delta - used) / p_dep;
      if (d < 0.0 || d > entries[dep].variance) return false;
      alloc[dep] = d;
      return true;
    };

    auto search = [&](const std::vector<std::vector<double>>& axes) {
      for (std::size_t c = 0; c < f; ++c) {
        if (axes[c].empty()) return;
      }
      std::vector<std::size_t> idx(f, 0);
      std::vector<double> alloc = out.allocation;
      while (true) {
        for (std::size_t c = 0; c < f; ++c) alloc[free_coords[c]] = axes[c][idx[c]];
        if (complete(alloc)) {
          ++out.evaluations;
          const double v = objective(alloc);
          if (v < best) {
            best = v;
            best_alloc = alloc;
          }
        }
        std::size_t c = 0;
        while (c < f && ++idx[c] == axes[c].size()) idx[c++] = 0;
        if (c == f) break;
      }
    };

    double h = std::max(step, max_var / 32.0);
    while (true) {
      std::vector<std::vector<double>> axes(f);
      for (std::size_t c = 0; c < f; ++c) {
        const double cap = entries[free_coords[c]].variance;
        axes[c] = axis(0.0, cap, h, cap);
      }
      search(axes);
      if (std::isfinite(best) || h <= step) break;
      h = std::max(step, h / 2.0);
    }
    if (!std::isfinite(best)) return false;

    while (h > step) {
      h = std::max(step, h / 4.0);
      std::vector<std::vector<double>> axes(f);
      for (std::size_t c = 0; c < f; ++c) {
        const double cap = entries[free_coords[c]].variance;
        const double centre = best_alloc[free_coords[c]];
        axes[c] = axis(centre - 8.0 * h, std::min(cap, centre + 8.0 * h), h, cap);
      }
      search(axes);
    }

    resolution = 0.0;
    double moved = 0.0;
    for (std::size_t c = 0; c < f; ++c) {
      const auto& e = entries[free_coords[c]];
      const double a = best_alloc[free_coords[c]];
      if (a < e.variance) resolution += 0.5 * e.weight * std::log1p(step / a);
      moved += e.weight * step;
    }
    if (best_alloc[dep] < entries[dep].variance && best_alloc[dep] > 0.0) {
      resolution += 0.5 * p_dep * std::log1p(moved / p_dep / best_alloc[dep]);
    }
    return true;
  };

  // Zero-variance letters are pinned at zero; every other letter takes a turn
  // as the dependent one, since a letter clamped at its variance leaves only a
  // thin feasible slice when it solves the constraint.
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t dep = 0; dep < n; ++dep) {
    if (!(entries[dep].weight > 0.0 && entries[dep].variance > 0.0)) continue;
    double b = std::numeric_limits<double>::infinity(), res = 0.0;
    std::vector<double> alloc = out.allocation;
    if (!solve(dep, b, alloc, res)) continue;
    found = true;
    if (b < best) {
      best = b;
      out.rate = b;
      out.allocation = alloc;
      out.resolution = res;
    }
  }
  if (!found) {
    throw Error(ErrorKind::GridTooCoarse, "no feasible lattice point found");
  }
  return out;
}

}  // namespace gwbounds::oracle
