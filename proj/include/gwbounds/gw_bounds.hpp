#pragma once

// Bounds on the common rate R_c as a function of the private sum-rate R_p of
// a Gray-Wyner network at symmetric MSE distortion, for unit-variance
// sources (rescale delta by 1/sigma2 beforehand).
//
// Everything is expressed through the scaled distortion t = delta * e^{R_p}:
//
//   saturated  t > 1            R_c = 0
//   high       1 - rho <= t <= 1
//              R_c = 1/2 log+ [ N^2 / ((1 - rho)(2t + rho - 1)) ]
//   low        t < 1 - rho      R_c = 1/2 log+ [ N^2 / t^2 ]
//
// with N^2 = N(X,Y)^2 for the lower bound and N^2 = 1 - rho^2 for the upper
// bound. The two coincide for a jointly Gaussian pair.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "gwbounds/entropy_power.hpp"
#include "gwbounds/error.hpp"
#include "gwbounds/numeric.hpp"
#include "gwbounds/source_models.hpp"

namespace gwbounds {

enum class Regime { high, low, saturated };
enum class BoundKind { lower, upper, exact };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::high: return "high";
    case Regime::low: return "low";
    case Regime::saturated: return "saturated";
  }
  return "unknown";
}

inline const char* to_string(BoundKind k) {
  switch (k) {
    case BoundKind::lower: return "lower";
    case BoundKind::upper: return "upper";
    case BoundKind::exact: return "exact";
  }
  return "unknown";
}

struct RateRegionPoint {
  double r_p = 0.0;
  double r_c = 0.0;
  Regime regime = Regime::saturated;
  BoundKind kind = BoundKind::lower;
};

/// t = delta * e^{R_p}, formed as exp(ln delta + R_p) like every bound so
/// that regime classification agrees across callers.
inline double scaled_distortion(double delta, double r_p) {
  return std::exp(std::log(delta) + r_p);
}

/// The boundary t = 1 - rho belongs to the high regime.
inline Regime classify_regime(double rho, double t) {
  if (t > 1.0) return Regime::saturated;
  if (t >= 1.0 - rho) return Regime::high;
  return Regime::low;
}

/// High-regime expression before the log+ clamp, from ln N^2.
inline double high_regime_value(double log_n2, double rho, double t) {
  return 0.5 * (log_n2 - std::log(1.0 - rho) - std::log(2.0 * t + rho - 1.0));
}

/// Low-regime expression before the log+ clamp: 1/2 ln N^2 - ln t.
inline double low_regime_value(double log_n2, double log_t) {
  return 0.5 * log_n2 - log_t;
}

namespace detail {

inline RateRegionPoint evaluate_bound(double log_n2, double rho, double delta,
                                      double r_p, BoundKind kind) {
  RateRegionPoint pt;
  pt.r_p = r_p;
  pt.kind = kind;
  const double log_t = std::log(delta) + r_p;
  const double t = std::exp(log_t);
  pt.regime = classify_regime(rho, t);
  switch (pt.regime) {
    case Regime::saturated:
      pt.r_c = 0.0;
      break;
    case Regime::high:
      pt.r_c = std::max(0.0, high_regime_value(log_n2, rho, t));
      break;
    case Regime::low:
      pt.r_c = std::max(0.0, low_regime_value(log_n2, log_t));
      break;
  }
  return pt;
}

inline void check_bound_inputs(double rho, double delta) {
  if (!(rho >= 0.0) || !(rho < 1.0)) {
    throw Error(ErrorKind::RhoOutOfRange, "rho must lie in [0, 1)");
  }
  if (!(delta > 0.0) || !(delta <= 1.0)) {
    throw Error(ErrorKind::BadDistortion,
                "normalized delta must satisfy 0 < delta <= 1");
  }
}

}  // namespace detail

/// Lower bound on R_c(R_p) for an arbitrary unit-variance source with pair
/// entropy power n_pair.
inline RateRegionPoint thm1_lower(double n_pair, double rho, double delta,
                                  double r_p) {
  detail::check_bound_inputs(rho, delta);
  if (!(n_pair > 0.0)) {
    throw Error(ErrorKind::NonPositiveInput, "pair entropy power must be positive");
  }
  return detail::evaluate_bound(2.0 * std::log(n_pair), rho, delta, r_p,
                                BoundKind::lower);
}

/// Upper bound on R_c(R_p); depends on the source only through rho.
inline RateRegionPoint thm1_upper(double rho, double delta, double r_p) {
  detail::check_bound_inputs(rho, delta);
  return detail::evaluate_bound(std::log(1.0 - rho * rho), rho, delta, r_p,
                                BoundKind::upper);
}

/// Exact R_c(R_p) of a unit-variance jointly Gaussian pair.
inline RateRegionPoint gaussian_exact(double rho, double delta, double r_p) {
  detail::check_bound_inputs(rho, delta);
  return detail::evaluate_bound(std::log(1.0 - rho * rho), rho, delta, r_p,
                                BoundKind::exact);
}

// ---------------------------------------------------------------------------
// Dual function behind the lower bound.

struct DualState {
  double nu = 1.0;
  double ell = 0.0;
  double d_ell = 0.0;
  double d2_ell = 0.0;
};

/// l(nu) together with its first two derivatives, for 1/2 < nu <= 1.
inline DualState dual_ell(double nu, double n_pair, double rho, double delta,
                          double r_p) {
  if (!(nu > 0.5) || !(nu <= 1.0)) {
    throw Error(ErrorKind::NuOutOfRange,
                "dual variable must satisfy 1/2 < nu <= 1 (got " +
                    std::to_string(nu) + ")");
  }
  const double log_2pie = std::log(kTwoPiE);
  const double two_nu_m1 = 2.0 * nu - 1.0;
  DualState s;
  s.nu = nu;
  s.ell = 0.5 * (2.0 * log_2pie + 2.0 * std::log(n_pair)) - nu * r_p -
          nu * (log_2pie + std::log(delta)) +
          0.5 * nu * (2.0 * std::log(nu) - std::log(two_nu_m1)) -
          0.5 * (1.0 - nu) *
              (2.0 * log_2pie + 2.0 * std::log(1.0 - rho) - std::log(two_nu_m1));
  s.d_ell = std::log(nu) + std::log(1.0 - rho) - std::log(two_nu_m1) -
            std::log(delta) - r_p;
  s.d2_ell = -1.0 / (nu * two_nu_m1);
  return s;
}

enum class NuClamp { none, lower_endpoint, upper_endpoint };

inline const char* to_string(NuClamp c) {
  switch (c) {
    case NuClamp::none: return "none";
    case NuClamp::lower_endpoint: return "lower_endpoint";
    case NuClamp::upper_endpoint: return "upper_endpoint";
  }
  return "unknown";
}

struct DualOptimum {
  double nu_star = 1.0;
  NuClamp clamp = NuClamp::none;
  DualState state;
  RateRegionPoint point;
};

/// Maximizes l over the admissible interval [1/(1+rho), 1]. The stationary
/// point is nu* = t / (2t - 1 + rho); in the low regime l is increasing on
/// the interval and the maximum sits at nu = 1.
inline DualOptimum dual_maximize(double n_pair, double rho, double delta,
                                 double r_p) {
  detail::check_bound_inputs(rho, delta);
  const double t = scaled_distortion(delta, r_p);
  const double lo = 1.0 / (1.0 + rho);
  DualOptimum out;
  const Regime regime = classify_regime(rho, t);
  if (regime == Regime::low) {
    out.nu_star = 1.0;
    out.clamp = NuClamp::upper_endpoint;
  } else {
    const double stationary = t / (2.0 * t - 1.0 + rho);
    if (stationary > 1.0) {
      out.nu_star = 1.0;
      out.clamp = NuClamp::upper_endpoint;
    } else if (stationary < lo) {
      out.nu_star = lo;
      out.clamp = NuClamp::lower_endpoint;
    } else {
      out.nu_star = stationary;
    }
  }
  out.state = dual_ell(out.nu_star, n_pair, rho, delta, r_p);
  out.point.r_p = r_p;
  out.point.kind = BoundKind::lower;
  out.point.regime = regime;
  out.point.r_c = regime == Regime::saturated ? 0.0 : std::max(0.0, out.state.ell);
  return out;
}

// ---------------------------------------------------------------------------
// Additive Gaussian channel sources and Wyner's common information.

/// C(X;Y) = ln(N(X,Y) / (1 - rho)).
inline double wyner_ci(double n_pair, double rho) {
  return std::log(n_pair / (1.0 - rho));
}

struct CornerPoint {
  double r_c = 0.0;
  double r_p = 0.0;
};

/// (R_c, R_p) = (ln(N / (1 - rho)), ln((1 - rho) / delta)).
inline CornerPoint wyner_corner(double n_pair, double rho, double delta) {
  return {wyner_ci(n_pair, rho), std::log((1.0 - rho) / delta)};
}

struct AdditiveResult {
  /// Set wherever the region is known exactly.
  std::optional<RateRegionPoint> exact;
  RateRegionPoint lower;
  RateRegionPoint upper;
  /// 1 - sigma_theta2 < t <= 1: only the generic bounds are available.
  bool bounds_only = false;
};

inline AdditiveResult additive_exact(double n_pair, double rho,
                                     double sigma_theta2, double delta,
                                     double r_p) {
  AdditiveResult out;
  out.lower = thm1_lower(n_pair, rho, delta, r_p);
  out.upper = thm1_upper(rho, delta, r_p);
  const double t = scaled_distortion(delta, r_p);
  if (t > 1.0 - sigma_theta2 && t <= 1.0) {
    out.bounds_only = true;
    return out;
  }
  RateRegionPoint exact = out.lower;
  exact.kind = BoundKind::exact;
  out.exact = exact;
  return out;
}

/// Source-dependent quantities the bounds need, computed once per source.
struct BoundInputs {
  SourceKind kind = SourceKind::gaussian;
  double rho = 0.0;
  double sigma_theta2 = 0.0;
  EntropyPowerValue n_pair;
};

inline BoundInputs bound_inputs(const ValidatedSource& source,
                                const QuadratureOptions& opts = {}) {
  BoundInputs in;
  in.kind = source.kind();
  in.rho = source.rho();
  in.sigma_theta2 = source.sigma_theta2();
  in.n_pair = pair_entropy_power(source, opts);
  return in;
}

inline AdditiveResult additive_exact(const BoundInputs& in, double delta,
                                     double r_p) {
  return additive_exact(in.n_pair.value, in.rho, in.sigma_theta2, delta, r_p);
}

// ---------------------------------------------------------------------------
// Size-one auxiliary constructions that attain the upper bounds.

/// W = alpha (X + Y) + N with N ~ N(0, noise_variance) independent of (X,Y).
struct ConstructionC {
  double rho = 0.0;
  double t = 1.0;
  double alpha = 0.0;
  double noise_variance = 1.0;

  /// alpha^2 Var(X+Y) + Var(N); equals 1.
  double w_variance() const {
    return alpha * alpha * 2.0 * (1.0 + rho) + noise_variance;
  }
  double cross_covariance() const { return alpha * (1.0 + rho); }
  /// E[Var(X|W)] for Gaussian (X,Y): Var X - Cov(X,W)^2 / Var W = t.
  double predicted_conditional_variance() const {
    const double c = cross_covariance();
    return 1.0 - c * c / w_variance();
  }
  /// I(X,Y;W) = 1/2 ln((1 + rho) / (2t + rho - 1)).
  double predicted_information() const {
    return 0.5 * std::log((1.0 + rho) / (2.0 * t + rho - 1.0));
  }
};

inline constexpr double kRegimeTolerance = 1e-12;

inline ConstructionC construction_c(double rho, double delta, double r_p) {
  detail::check_bound_inputs(rho, delta);
  const double t = scaled_distortion(delta, r_p);
  if (t < 1.0 - rho - kRegimeTolerance || t > 1.0 + kRegimeTolerance) {
    throw Error(ErrorKind::RegimeViolation,
                "construction needs 1 - rho <= delta e^{R_p} <= 1 (got " +
                    std::to_string(t) + ")");
  }
  ConstructionC c;
  c.rho = rho;
  c.t = std::clamp(t, 1.0 - rho, 1.0);
  c.alpha = std::sqrt(1.0 - c.t) / (1.0 + rho);
  c.noise_variance = (2.0 * c.t + rho - 1.0) / (1.0 + rho);
  return c;
}

/// W = theta + sqrt(alpha_d) V for the additive model, leaving
/// X = W + N_X and Y = W + N_Y with Gaussian (N_X, N_Y) independent of W.
struct ConstructionD {
  double rho = 0.0;
  double sigma_theta2 = 0.0;
  double alpha_d = 0.0;

  double noise_variance() const { return 1.0 - sigma_theta2 - alpha_d; }
  double noise_covariance() const { return rho - sigma_theta2 - alpha_d; }
  double w_variance() const { return sigma_theta2 + alpha_d; }
  /// E[Var(X|W)] = E[Var(Y|W)] = 1 - sigma_theta2 - alpha_d.
  double conditional_variance() const { return noise_variance(); }
  /// R_{X|W} + R_{Y|W} = ln((1 - sigma_theta2 - alpha_d) / delta).
  double induced_private_rate(double delta) const {
    return std::log(conditional_variance() / delta);
  }
  /// I(X,Y;W) = h(X,Y) - h(N_X, N_Y), before the log+ clamp.
  double predicted_information(double n_pair) const {
    const double a = noise_variance(), b = noise_covariance();
    return std::log(n_pair) - 0.5 * std::log(a * a - b * b);
  }
};

inline ConstructionD construction_d(double rho, double sigma_theta2,
                                    double delta, double r_p) {
  detail::check_bound_inputs(rho, delta);
  const double t = scaled_distortion(delta, r_p);
  if (t < 1.0 - rho - kRegimeTolerance ||
      t > 1.0 - sigma_theta2 + kRegimeTolerance) {
    throw Error(ErrorKind::RegimeViolation,
                "construction needs 1 - rho <= delta e^{R_p} <= 1 - sigma_theta2 (got " +
                    std::to_string(t) + ")");
  }
  ConstructionD d;
  d.rho = rho;
  d.sigma_theta2 = sigma_theta2;
  d.alpha_d = std::clamp(1.0 - sigma_theta2 - t, 0.0, rho - sigma_theta2);
  return d;
}

}  // namespace gwbounds
