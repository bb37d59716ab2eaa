#pragma once

// Desk-scale discrete stand-ins for continuous sources: a jointly Gaussian
// pair quantized on an m x m product grid, plus the reproduction grids the
// Blahut-Arimoto oracles run on.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "gwbounds/error.hpp"
#include "gwbounds/quadrature.hpp"
#include "gwbounds/source_models.hpp"

namespace gwbounds::oracle {

struct QuantizedInstance {
  /// Standardized joint pmf (unit-variance marginals).
  DiscreteJointSpec joint;
  std::vector<double> x_grid;
  std::vector<double> y_grid;
  std::string provenance;
  double cell_width = 0.0;
  double parent_rho = 0.0;
  /// Correlation of the quantized pair after standardization.
  double rho = 0.0;
};

inline constexpr std::size_t kMaxQuantizedSide = 16;
inline constexpr std::size_t kMaxGridPoints = 64;

/// `points` equally spaced values covering [min - 3 sqrt(delta), max + 3 sqrt(delta)].
inline std::vector<double> reproduction_grid(const std::vector<double>& support,
                                             double delta, std::size_t points) {
  if (points < 2 || points > kMaxGridPoints) {
    throw Error(ErrorKind::BadConfig, "reproduction grid needs 2..64 points");
  }
  double lo = support.front(), hi = support.front();
  for (double v : support) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double pad = 3.0 * std::sqrt(delta);
  lo -= pad;
  hi += pad;
  std::vector<double> g(points);
  for (std::size_t j = 0; j < points; ++j) {
    g[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(points - 1);
  }
  return g;
}

namespace detail {

inline double std_normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// P(a <= X < b, c <= Y < d) for a unit Gaussian pair with correlation rho.
inline double bivariate_cell_mass(double rho, double a, double b, double c,
                                  double d) {
  const auto& rule = gwbounds::detail::gauss_legendre16();
  const double s = std::sqrt(1.0 - rho * rho);
  constexpr int kPanels = 16;
  const double width = (b - a) / kPanels;
  double mass = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    const double mid = a + (p + 0.5) * width;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double x = mid + 0.5 * width * rule.nodes[i];
      const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
      const double inner =
          std_normal_cdf((d - rho * x) / s) - std_normal_cdf((c - rho * x) / s);
      mass += 0.5 * width * rule.weights[i] * phi * inner;
    }
  }
  return mass;
}

}  // namespace detail

/// Quantizes a unit Gaussian pair on m equal-width cells per axis spanning
/// [-half_range, half_range]; the outer cells absorb the tails. Support
/// points are cell centres.
inline QuantizedInstance quantize_gaussian_pair(double rho, std::size_t m,
                                                double delta,
                                                std::size_t grid_points = 48,
                                                double half_range = 2.4) {
  if (m < 2 || m > kMaxQuantizedSide) {
    throw Error(ErrorKind::BadConfig, "quantized side must lie in 2..16");
  }
  if (!(rho >= 0.0) || !(rho < 1.0)) {
    throw Error(ErrorKind::RhoOutOfRange, "rho must lie in [0, 1)");
  }
  constexpr double kTail = 12.0;
  const double width = 2.0 * half_range / static_cast<double>(m);
  std::vector<double> edges(m + 1);
  for (std::size_t i = 0; i <= m; ++i) {
    edges[i] = -half_range + width * static_cast<double>(i);
  }
  std::vector<double> centres(m);
  for (std::size_t i = 0; i < m; ++i) centres[i] = 0.5 * (edges[i] + edges[i + 1]);
  edges.front() = -kTail;
  edges.back() = kTail;

  DiscreteJointSpec raw;
  raw.x_support = centres;
  raw.y_support = centres;
  raw.pmf.resize(m * m);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double p = detail::bivariate_cell_mass(rho, edges[i], edges[i + 1],
                                                   edges[j], edges[j + 1]);
      raw.pmf[i * m + j] = p;
      total += p;
    }
  }
  for (double& p : raw.pmf) p /= total;

  const ValidatedSource v = validate(raw);
  QuantizedInstance q;
  q.joint = *v.discrete();
  q.rho = v.rho();
  q.parent_rho = rho;
  q.cell_width = width / std::sqrt(v.sigma2());
  q.provenance = "gaussian_pair(rho=" + std::to_string(rho) +
                 ") quantized on " + std::to_string(m) + "x" + std::to_string(m) +
                 " cells over +-" + std::to_string(half_range);
  q.x_grid = reproduction_grid(q.joint.x_support, delta, grid_points);
  q.y_grid = reproduction_grid(q.joint.y_support, delta, grid_points);
  return q;
}

/// Marginal laws of a joint pmf.
inline std::vector<double> x_marginal(const DiscreteJointSpec& j) {
  std::vector<double> px(j.x_support.size(), 0.0);
  for (std::size_t a = 0; a < j.x_support.size(); ++a) {
    for (std::size_t b = 0; b < j.y_support.size(); ++b) px[a] += j.at(a, b);
  }
  return px;
}

inline std::vector<double> y_marginal(const DiscreteJointSpec& j) {
  std::vector<double> py(j.y_support.size(), 0.0);
  for (std::size_t a = 0; a < j.x_support.size(); ++a) {
    for (std::size_t b = 0; b < j.y_support.size(); ++b) py[b] += j.at(a, b);
  }
  return py;
}

}  // namespace gwbounds::oracle
