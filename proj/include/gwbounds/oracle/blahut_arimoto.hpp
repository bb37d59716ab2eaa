#pragma once

// Blahut-Arimoto computation of MSE rate-distortion functions for discrete
// sources on a fixed reproduction grid, plus the conditional version with a
// common slope across conditioning letters (the optimal distortion split
// equalizes the slope of every per-letter curve).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <stdexcept>
#include <vector>

#include "gwbounds/error.hpp"

namespace gwbounds::oracle {

struct BlahutArimotoOptions {
  /// Converged when the certified objective gap max_j ln c_j is below this.
  double tolerance = 1e-9;
  std::size_t max_iterations = 200000;
  /// Gap still accepted when max_iterations runs out (slow convergence near
  /// the slope where a letter's rate reaches zero); larger gaps throw.
  double gap_limit = 1e-6;
  /// Bisection on the slope stops once |D(s) - delta| is below this.
  double distortion_tolerance = 1e-10;
  std::size_t max_bisections = 200;
};

struct SlopePoint {
  double slope = 0.0;
  double rate = 0.0;        // I(X; X_hat) at the fixed point, nats
  double distortion = 0.0;  // E (X - X_hat)^2
  std::size_t iterations = 0;
  /// Certified bound on the objective error at exit.
  double gap = 0.0;
};

/// Squared-error distortion table between a source support and a
/// reproduction grid, shared by every pmf on that support.
class DistortionTable {
 public:
  DistortionTable(std::span<const double> support, std::span<const double> grid)
      : m_(support.size()), r_(grid.size()), d_(m_ * r_), row_min_(m_) {
    if (m_ == 0 || r_ == 0) {
      throw Error(ErrorKind::BadPmf, "empty support or reproduction grid");
    }
    for (std::size_t i = 0; i < m_; ++i) {
      double mn = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < r_; ++j) {
        const double e = support[i] - grid[j];
        d_[i * r_ + j] = e * e;
        mn = std::min(mn, e * e);
      }
      row_min_[i] = mn;
    }
  }

  std::size_t support_size() const { return m_; }
  std::size_t grid_size() const { return r_; }
  double operator()(std::size_t i, std::size_t j) const { return d_[i * r_ + j]; }
  double row_min(std::size_t i) const { return row_min_[i]; }

  /// exp(-s (d(i,j) - min_j d(i,j))), row-major.
  std::vector<double> kernel(double slope) const {
    std::vector<double> a(m_ * r_);
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < r_; ++j) {
        a[i * r_ + j] = std::exp(-slope * (d_[i * r_ + j] - row_min_[i]));
      }
    }
    return a;
  }

  /// Smallest achievable distortion: every x mapped to its nearest grid point.
  double min_distortion(std::span<const double> pmf) const {
    double s = 0.0;
    for (std::size_t i = 0; i < m_; ++i) s += pmf[i] * row_min_[i];
    return s;
  }

  /// Distortion at zero rate: best constant reproduction.
  double zero_rate_distortion(std::span<const double> pmf) const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < r_; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < m_; ++i) s += pmf[i] * d_[i * r_ + j];
      best = std::min(best, s);
    }
    return best;
  }

 private:
  std::size_t m_, r_;
  std::vector<double> d_;
  std::vector<double> row_min_;
};

namespace detail {

/// Objective G(q) = sum_x p(x) [s dmin(x) - ln Z(x)], Z(x) = sum_j q_j A(x,j),
/// and the Blahut-Arimoto map q_j -> q_j c_j with c_j = sum_x p(x) A(x,j) / Z(x).
/// `gap` receives max_j ln c_j, which bounds G(q) - min G from above.
inline double ba_map(const DistortionTable& table, std::span<const double> kernel,
                     std::span<const double> pmf, double slope,
                     const std::vector<double>& q, std::vector<double>& mapped,
                     double& gap) {
  const std::size_t m = table.support_size(), r = table.grid_size();
  std::vector<double> c(r, 0.0);
  double objective = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (pmf[i] <= 0.0) continue;
    const double* a = &kernel[i * r];
    double zi = 0.0;
    for (std::size_t j = 0; j < r; ++j) zi += q[j] * a[j];
    objective += pmf[i] * (slope * table.row_min(i) - std::log(zi));
    const double scale = pmf[i] / zi;
    for (std::size_t j = 0; j < r; ++j) c[j] += scale * a[j];
  }
  mapped.resize(r);
  double top = 0.0, total = 0.0;
  for (std::size_t j = 0; j < r; ++j) {
    top = std::max(top, c[j]);
    mapped[j] = q[j] * c[j];
    total += mapped[j];
  }
  for (double& v : mapped) v /= total;
  gap = std::log(top);
  return objective;
}

/// G(q) alone; +inf when some source letter has Z(x) = 0.
inline double ba_objective(const DistortionTable& table, std::span<const double> kernel,
                           std::span<const double> pmf, double slope,
                           const std::vector<double>& q) {
  const std::size_t m = table.support_size(), r = table.grid_size();
  double objective = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (pmf[i] <= 0.0) continue;
    double zi = 0.0;
    for (std::size_t j = 0; j < r; ++j) zi += q[j] * kernel[i * r + j];
    if (!(zi > 0.0)) return std::numeric_limits<double>::infinity();
    objective += pmf[i] * (slope * table.row_min(i) - std::log(zi));
  }
  return objective;
}

/// Solves the dense system a x = b in place (partial pivoting); false when
/// a pivot vanishes.
inline bool solve_dense(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(a[i * n + k]) > std::abs(a[piv * n + k])) piv = i;
    }
    if (!(std::abs(a[piv * n + k]) > 1e-300)) return false;
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
      std::swap(b[k], b[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a[i * n + k] / a[k * n + k];
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
      b[i] -= f * b[k];
    }
  }
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a[k * n + j] * b[j];
    b[k] = s / a[k * n + k];
  }
  return true;
}

/// One damped Newton step on G restricted to the simplex face spanned by the
/// current support plus the letters with c_j > 1. Letters that the step
/// drives to zero leave the support. Returns false when no decrease was
/// found; q is only changed on success.
inline bool ba_newton_step(const DistortionTable& table, std::span<const double> kernel,
                           std::span<const double> pmf, double slope, std::vector<double>& q) {
  const std::size_t m = table.support_size(), r = table.grid_size();
  std::vector<double> z(m, 0.0), c(r, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (pmf[i] <= 0.0) continue;
    for (std::size_t j = 0; j < r; ++j) z[i] += q[j] * kernel[i * r + j];
    for (std::size_t j = 0; j < r; ++j) c[j] += pmf[i] * kernel[i * r + j] / z[i];
  }
  std::vector<std::size_t> face;
  for (std::size_t j = 0; j < r; ++j) {
    if (q[j] > 0.0 || c[j] > 1.0) face.push_back(j);
  }
  std::vector<double> dir(r, 0.0);
  for (int pass = 0; pass < 8; ++pass) {
    const std::size_t k = face.size();
    const std::size_t n = k + 1;
    std::vector<double> a(n * n, 0.0), b(n, 0.0);
    double trace = 0.0;
    for (std::size_t u = 0; u < k; ++u) {
      for (std::size_t v = u; v < k; ++v) {
        double h = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          if (pmf[i] <= 0.0) continue;
          h += pmf[i] * kernel[i * r + face[u]] * kernel[i * r + face[v]] / (z[i] * z[i]);
        }
        a[u * n + v] = a[v * n + u] = h;
      }
      trace += a[u * n + u];
    }
    // Levenberg shift: the Hessian has rank at most |support of p|.
    const double shift = 1e-10 * trace / static_cast<double>(k);
    for (std::size_t u = 0; u < k; ++u) {
      a[u * n + u] += shift;
      a[u * n + k] = a[k * n + u] = 1.0;
      b[u] = c[face[u]];
    }
    if (!solve_dense(a, b, n)) return false;
    std::vector<std::size_t> keep;
    for (std::size_t u = 0; u < k; ++u) {
      if (q[face[u]] > 0.0 || b[u] > 0.0) keep.push_back(face[u]);
    }
    if (keep.size() == k) {
      std::fill(dir.begin(), dir.end(), 0.0);
      for (std::size_t u = 0; u < k; ++u) dir[face[u]] = b[u];
      break;
    }
    if (keep.empty()) return false;
    face.swap(keep);
    if (pass == 7) return false;
  }

  double slope_dir = 0.0, step = 1.0;
  std::size_t blocking = r;
  for (std::size_t j = 0; j < r; ++j) {
    slope_dir -= c[j] * dir[j];
    if (dir[j] < 0.0 && q[j] + step * dir[j] < 0.0) {
      step = -q[j] / dir[j];
      blocking = j;
    }
  }
  if (!(slope_dir < 0.0)) return false;
  const double g0 = ba_objective(table, kernel, pmf, slope, q);
  std::vector<double> trial(r);
  for (int half = 0; half < 40; ++half, step *= 0.5, blocking = r) {
    double total = 0.0;
    for (std::size_t j = 0; j < r; ++j) {
      trial[j] = j == blocking ? 0.0 : std::max(0.0, q[j] + step * dir[j]);
      total += trial[j];
    }
    for (double& v : trial) v /= total;
    const double g = ba_objective(table, kernel, pmf, slope, trial);
    if (g <= g0 + 1e-4 * step * slope_dir) {
      q.swap(trial);
      return true;
    }
  }
  return false;
}

}  // namespace detail

/// Runs Blahut-Arimoto at a fixed slope. `output` is the reproduction law
/// q(x_hat); it is used as the starting point and overwritten with the fixed
/// point. `kernel` must be table.kernel(slope).
///
/// Plain iterations are interleaved with squared extrapolation (SQUAREM);
/// an extrapolated law is kept only when it does not raise the objective, so
/// the accepted objective sequence never increases. A plain step that raises
/// it is reported as std::logic_error. Every few rounds damped Newton steps on
/// the active face are tried as well, again only when they lower the
/// objective. Iteration stops once the certified gap max_j ln c_j drops below
/// the tolerance.
inline SlopePoint blahut_arimoto_at_slope(const DistortionTable& table,
                                          std::span<const double> kernel,
                                          std::span<const double> pmf,
                                          double slope,
                                          std::vector<double>& output,
                                          const BlahutArimotoOptions& opts = {}) {
  const std::size_t m = table.support_size(), r = table.grid_size();
  if (output.size() != r) {
    output.assign(r, 1.0 / static_cast<double>(r));
  } else {
    // A warm start may carry letters that underflowed to zero at another
    // slope; blend in a little of the uniform law so every letter can regrow.
    for (double& v : output) v = (1.0 - 1e-6) * v + 1e-6 / static_cast<double>(r);
  }
  std::vector<double> q1, q2, q3, trial(r);
  double gap = 0.0, gap1 = 0.0, gap3 = 0.0;

  SlopePoint pt;
  pt.slope = slope;
  constexpr std::size_t kNewtonEvery = 32;
  std::size_t it = 0, rounds = 0;
  while (it < opts.max_iterations) {
    const double g0 = detail::ba_map(table, kernel, pmf, slope, output, q1, gap);
    ++it;
    if (gap < opts.tolerance) break;
    const double g1 = detail::ba_map(table, kernel, pmf, slope, q1, q2, gap1);
    ++it;
    if (g1 > g0 + 1e-12 * (1.0 + std::abs(g0))) {
      throw std::logic_error("Blahut-Arimoto objective increased");
    }
    double nr = 0.0, nv = 0.0;
    for (std::size_t j = 0; j < r; ++j) {
      const double d1 = q1[j] - output[j];
      const double d2 = q2[j] - 2.0 * q1[j] + output[j];
      nr += d1 * d1;
      nv += d2 * d2;
    }
    bool accepted = false;
    if (nv > 0.0) {
      const double alpha = std::min(-1.0, -std::sqrt(nr / nv));
      double total = 0.0;
      for (std::size_t j = 0; j < r; ++j) {
        const double d1 = q1[j] - output[j];
        const double d2 = q2[j] - 2.0 * q1[j] + output[j];
        // Growing letters never fall below the plain iterate and shrinking
        // ones at most halve, so no letter is driven towards underflow.
        const double floor = q2[j] > q1[j] ? q2[j] : 0.5 * q2[j];
        trial[j] = std::max(floor, output[j] - 2.0 * alpha * d1 + alpha * alpha * d2);
        total += trial[j];
      }
      for (double& v : trial) v /= total;
      const double gt = detail::ba_map(table, kernel, pmf, slope, trial, q3, gap3);
      ++it;
      if (std::isfinite(gt) && gt <= g1) {
        output.swap(trial);
        accepted = true;
      }
    }
    if (!accepted) output.swap(q2);
    // Multiplicative steps crawl where the support is about to change; a few
    // Newton steps on the active face settle those cases.
    if (++rounds % kNewtonEvery == 0) {
      for (int k = 0; k < 4; ++k) {
        if (!detail::ba_newton_step(table, kernel, pmf, slope, output)) break;
      }
    }
  }
  if (gap > opts.gap_limit) {
    throw Error(ErrorKind::NotConverged,
                "Blahut-Arimoto did not converge within max_iterations (slope " +
                    std::to_string(slope) + ", gap " + std::to_string(gap) + ")");
  }

  // Rate and distortion of the test channel Q(j|x) = q_j A(x,j) / Z(x)
  // against its own output law q1.
  double rate = 0.0, dist = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (pmf[i] <= 0.0) continue;
    const double* a = &kernel[i * r];
    double zi = 0.0;
    for (std::size_t j = 0; j < r; ++j) zi += output[j] * a[j];
    for (std::size_t j = 0; j < r; ++j) {
      const double qj = output[j] * a[j] / zi;
      if (qj <= 0.0 || q1[j] <= 0.0) continue;
      rate += pmf[i] * qj * std::log(qj / q1[j]);
      dist += pmf[i] * qj * table(i, j);
    }
  }
  output.swap(q1);
  pt.rate = std::max(0.0, rate);
  pt.distortion = dist;
  pt.iterations = it;
  pt.gap = gap;
  return pt;
}

/// R(delta) of a discrete source on `support` with law `pmf`, reproduced on
/// `grid`. Bisects the slope until the fixed-point distortion matches delta
/// and corrects the residual mismatch along the tangent (slope -s). `gap`,
/// when given, receives the certified gap at the final slope.
inline double ba_rate_distortion(std::span<const double> pmf,
                                 std::span<const double> support,
                                 std::span<const double> grid, double delta,
                                 const BlahutArimotoOptions& opts = {},
                                 double* gap = nullptr) {
  if (pmf.size() != support.size()) {
    throw Error(ErrorKind::BadPmf, "pmf and support differ in length");
  }
  const DistortionTable table(support, grid);
  if (gap != nullptr) *gap = 0.0;
  if (delta >= table.zero_rate_distortion(pmf)) return 0.0;
  if (delta < table.min_distortion(pmf) + 1e-12) {
    throw Error(ErrorKind::DeltaInfeasible,
                "delta is below the distortion reachable on the grid");
  }

  std::vector<double> output;
  auto solve = [&](double s) {
    const auto kernel = table.kernel(s);
    return blahut_arimoto_at_slope(table, kernel, pmf, s, output, opts);
  };

  double s_lo = 0.0;
  double s_hi = 1.0 / delta;
  SlopePoint hi = solve(s_hi);
  while (hi.distortion > delta) {
    s_lo = s_hi;
    s_hi *= 2.0;
    hi = solve(s_hi);
  }
  SlopePoint best = hi;
  for (std::size_t k = 0; k < opts.max_bisections; ++k) {
    const double s_mid = 0.5 * (s_lo + s_hi);
    const SlopePoint mid = solve(s_mid);
    best = mid;
    if (std::abs(mid.distortion - delta) < opts.distortion_tolerance) break;
    if (mid.distortion > delta) {
      s_lo = s_mid;
    } else {
      s_hi = s_mid;
    }
    if (s_hi - s_lo < 1e-13 * s_hi) break;
  }
  if (gap != nullptr) *gap = best.gap;
  return std::max(0.0, best.rate + best.slope * (best.distortion - delta));
}

struct ConditionalRateDistortion {
  double rate = 0.0;
  double slope = 0.0;
  /// Per-letter distortions at the common slope; weighted sum is delta.
  std::vector<double> per_letter_distortion;
  std::vector<double> per_letter_rate;
  /// Weighted certified objective gap at the final slope.
  double gap = 0.0;
};

/// R_{X|W}(delta) for a discrete W: cond_pmfs[w] is p(x | w) on the table's
/// support, weights[w] = p(w).
inline ConditionalRateDistortion ba_conditional_rate_distortion(
    const DistortionTable& table,
    const std::vector<std::vector<double>>& cond_pmfs,
    std::span<const double> weights, double delta,
    const BlahutArimotoOptions& opts = {}) {
  const std::size_t k = cond_pmfs.size();
  ConditionalRateDistortion out;
  out.per_letter_distortion.assign(k, 0.0);
  out.per_letter_rate.assign(k, 0.0);

  double d_max = 0.0, d_min = 0.0;
  for (std::size_t w = 0; w < k; ++w) {
    if (weights[w] <= 0.0) continue;
    const double zr = table.zero_rate_distortion(cond_pmfs[w]);
    out.per_letter_distortion[w] = zr;
    d_max += weights[w] * zr;
    d_min += weights[w] * table.min_distortion(cond_pmfs[w]);
  }
  if (delta >= d_max) return out;
  if (delta < d_min + 1e-12) {
    throw Error(ErrorKind::DeltaInfeasible,
                "delta is below the conditional distortion reachable on the grid");
  }

  std::vector<std::vector<double>> outputs(k);
  auto solve = [&](double s) {
    const auto kernel = table.kernel(s);
    ConditionalRateDistortion c;
    c.slope = s;
    c.per_letter_distortion.assign(k, 0.0);
    c.per_letter_rate.assign(k, 0.0);
    double rate = 0.0, dist = 0.0;
    for (std::size_t w = 0; w < k; ++w) {
      if (weights[w] <= 0.0) continue;
      const SlopePoint p =
          blahut_arimoto_at_slope(table, kernel, cond_pmfs[w], s, outputs[w], opts);
      c.per_letter_distortion[w] = p.distortion;
      c.per_letter_rate[w] = p.rate;
      c.gap += weights[w] * p.gap;
      rate += weights[w] * p.rate;
      dist += weights[w] * p.distortion;
    }
    c.rate = rate;
    return std::pair{c, dist};
  };

  double s_lo = 0.0;
  double s_hi = 1.0 / delta;
  auto hi = solve(s_hi);
  while (hi.second > delta) {
    s_lo = s_hi;
    s_hi *= 2.0;
    hi = solve(s_hi);
  }
  auto best = hi;
  for (std::size_t it = 0; it < opts.max_bisections; ++it) {
    const double s_mid = 0.5 * (s_lo + s_hi);
    auto mid = solve(s_mid);
    best = mid;
    if (std::abs(mid.second - delta) < opts.distortion_tolerance) break;
    if (mid.second > delta) {
      s_lo = s_mid;
    } else {
      s_hi = s_mid;
    }
    if (s_hi - s_lo < 1e-13 * s_hi) break;
  }
  out = best.first;
  out.rate = std::max(0.0, out.rate + out.slope * (best.second - delta));
  return out;
}

}  // namespace gwbounds::oracle
