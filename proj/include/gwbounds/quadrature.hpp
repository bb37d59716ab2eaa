#pragma once

// Deterministic 1-D quadrature for the differential entropy of finite
// Gaussian mixtures: composite Gauss-Legendre on uniform panels over a
// truncated domain, with panel doubling until two successive estimates agree.

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "gwbounds/error.hpp"
#include "gwbounds/numeric.hpp"

namespace gwbounds {

struct MixtureComponent {
  double weight = 0.0;
  double mean = 0.0;
  double variance = 1.0;
};

using GaussianMixture1D = std::vector<MixtureComponent>;

namespace detail {

template <std::size_t N>
struct GaussLegendre {
  std::array<double, N> nodes{};
  std::array<double, N> weights{};

  GaussLegendre() {
    for (std::size_t i = 0; i < N; ++i) {
      double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                          (static_cast<double>(N) + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0, p1 = x;
        for (std::size_t k = 2; k <= N; ++k) {
          const double kk = static_cast<double>(k);
          const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
          p0 = p1;
          p1 = p2;
        }
        dp = static_cast<double>(N) * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[i] = x;
      weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

inline const GaussLegendre<16>& gauss_legendre16() {
  static const GaussLegendre<16> rule;
  return rule;
}

inline double upper_tail(double k) {
  return 0.5 * std::erfc(k / std::numbers::sqrt2);
}

}  // namespace detail

inline constexpr double kTruncationSigmas = 8.0;

/// ln f(x) for the mixture density f.
inline double mixture_log_density(const GaussianMixture1D& mix, double x) {
  double terms[64];
  std::vector<double> heap;
  double* buf = terms;
  if (mix.size() > 64) {
    heap.resize(mix.size());
    buf = heap.data();
  }
  std::size_t n = 0;
  for (const auto& c : mix) {
    if (c.weight <= 0.0) continue;
    const double d = x - c.mean;
    buf[n++] = std::log(c.weight) - 0.5 * std::log(2.0 * std::numbers::pi * c.variance) -
               0.5 * d * d / c.variance;
  }
  return log_sum_exp(std::span<const double>(buf, n));
}

struct MixtureDomain {
  double lo = 0.0;
  double hi = 0.0;
};

/// Union of [mean - 8 sd, mean + 8 sd] over the components.
inline MixtureDomain mixture_domain(const GaussianMixture1D& mix) {
  MixtureDomain d{INFINITY, -INFINITY};
  for (const auto& c : mix) {
    if (c.weight <= 0.0) continue;
    const double sd = std::sqrt(c.variance);
    d.lo = std::min(d.lo, c.mean - kTruncationSigmas * sd);
    d.hi = std::max(d.hi, c.mean + kTruncationSigmas * sd);
  }
  return d;
}

/// Analytic bound on |integral of -f ln f| outside the truncated domain.
/// Uses f >= p_i phi_i, so -ln f <= -ln p_i - ln phi_i on each component's
/// share of the tail mass.
inline double mixture_tail_bound(const GaussianMixture1D& mix,
                                 const MixtureDomain& domain) {
  double bound = 0.0;
  for (const auto& c : mix) {
    if (c.weight <= 0.0) continue;
    const double sd = std::sqrt(c.variance);
    const double k_lo = (c.mean - domain.lo) / sd;
    const double k_hi = (domain.hi - c.mean) / sd;
    const double offset =
        std::max(0.0, -std::log(c.weight) +
                          0.5 * std::log(2.0 * std::numbers::pi * c.variance));
    double tail = 0.0;
    for (double k : {k_lo, k_hi}) {
      const double q = detail::upper_tail(k);
      const double pdf = std::exp(-0.5 * k * k) / std::sqrt(2.0 * std::numbers::pi);
      tail += offset * q + 0.5 * (k * pdf + q);
    }
    bound += c.weight * tail;
  }
  return bound;
}

/// -integral f ln f over the truncated domain with a fixed panel count.
inline double mixture_entropy_fixed(const GaussianMixture1D& mix,
                                    const MixtureDomain& domain,
                                    std::size_t panels) {
  const auto& rule = detail::gauss_legendre16();
  const double width = (domain.hi - domain.lo) / static_cast<double>(panels);
  std::vector<double> cells(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double a = domain.lo + width * static_cast<double>(p);
    const double mid = a + 0.5 * width;
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double x = mid + 0.5 * width * rule.nodes[i];
      const double lf = mixture_log_density(mix, x);
      acc += rule.weights[i] * (-std::exp(lf) * lf);
    }
    cells[p] = 0.5 * width * acc;
  }
  return pairwise_sum(cells);
}

struct MixtureEntropy {
  double entropy = 0.0;
  double est_error = 0.0;
  std::size_t panels = 0;
};

struct QuadratureOptions {
  /// Stop doubling once successive estimates differ by less than this.
  double tolerance = 1e-13;
  /// Largest acceptable est_error.
  double budget = 1e-6;
  std::size_t initial_panels = 8;
  std::size_t max_panels = std::size_t{1} << 15;
};

/// Differential entropy h = -integral f ln f of a Gaussian mixture (nats).
inline MixtureEntropy mixture_entropy(const GaussianMixture1D& mix,
                                      const QuadratureOptions& opts = {}) {
  const MixtureDomain domain = mixture_domain(mix);
  const double tail = mixture_tail_bound(mix, domain);
  std::size_t panels = opts.initial_panels;
  double previous = mixture_entropy_fixed(mix, domain, panels);
  double diff = INFINITY;
  double current = previous;
  while (panels < opts.max_panels) {
    panels *= 2;
    current = mixture_entropy_fixed(mix, domain, panels);
    diff = std::abs(current - previous);
    previous = current;
    if (diff <= opts.tolerance) break;
  }
  MixtureEntropy out;
  out.entropy = current;
  out.panels = panels;
  out.est_error = std::max(diff, 64.0 * 2.2e-16 * std::max(1.0, std::abs(current))) + tail;
  if (!(out.est_error <= opts.budget)) {
    throw Error(ErrorKind::QuadratureNotConverged,
                "mixture entropy error estimate " + std::to_string(out.est_error) +
                    " exceeds budget " + std::to_string(opts.budget));
  }
  return out;
}

}  // namespace gwbounds
