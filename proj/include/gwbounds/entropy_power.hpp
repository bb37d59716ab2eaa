#pragma once

// Differential entropies and entropy powers of the supported sources.
//
// Pair entropy power uses N(X,Y) = e^{h(X,Y)} / (2 pi e), so that a unit
// variance Gaussian pair has N(X,Y) = sqrt(1 - rho^2). Conditional entropy
// power is N(X|Y) = e^{2 h(X|Y)} / (2 pi e).
//
// For the additive channel model the pair density is a Gaussian mixture whose
// components share the covariance K = [[1-s, rho-s], [rho-s, 1-s]] and have
// means (theta_i, theta_i). In the rotated coordinates U = (X+Y)/sqrt2,
// V = (X-Y)/sqrt2 every component factors as N(sqrt2 theta_i, 1+rho-2s) x
// N(0, 1-rho) with the same V factor, so h(X,Y) = h(U) + h(V) exactly and the
// only numerical work is a 1-D mixture entropy.

#include <cmath>
#include <numbers>

#include "gwbounds/error.hpp"
#include "gwbounds/numeric.hpp"
#include "gwbounds/quadrature.hpp"
#include "gwbounds/source_models.hpp"

namespace gwbounds {

enum class EntropyMethod { analytic, quadrature };

inline const char* to_string(EntropyMethod m) {
  return m == EntropyMethod::analytic ? "analytic" : "quadrature";
}

struct EntropyPowerValue {
  double value = 0.0;    // entropy power
  double entropy = 0.0;  // underlying differential entropy (nats)
  EntropyMethod method = EntropyMethod::analytic;
  double est_error = 0.0;  // absolute error bound on value
};

namespace detail {

inline double gaussian_entropy(double variance) {
  return 0.5 * std::log(kTwoPiE * variance);
}

inline void require_continuous(const ValidatedSource& source) {
  if (source.discrete() != nullptr) {
    throw Error(ErrorKind::UndefinedForDiscrete,
                "differential entropy is undefined for a discrete pmf");
  }
}

/// Law of U = (X+Y)/sqrt2 for the additive model.
inline GaussianMixture1D sum_axis_mixture(const AdditiveChannelSpec& a) {
  GaussianMixture1D mix;
  const double var = 1.0 + a.rho - 2.0 * a.sigma_theta2;
  for (const auto& atom : a.theta_law) {
    mix.push_back({atom.prob, std::numbers::sqrt2 * atom.value, var});
  }
  return mix;
}

/// Law of Y = theta + Z_y for the additive model.
inline GaussianMixture1D marginal_mixture(const AdditiveChannelSpec& a) {
  GaussianMixture1D mix;
  const double var = 1.0 - a.sigma_theta2;
  for (const auto& atom : a.theta_law) {
    mix.push_back({atom.prob, atom.value, var});
  }
  return mix;
}

}  // namespace detail

/// N(X,Y) of a validated (continuous) source.
inline EntropyPowerValue pair_entropy_power(const ValidatedSource& source,
                                            const QuadratureOptions& opts = {}) {
  detail::require_continuous(source);
  const double rho = source.rho();
  EntropyPowerValue out;
  if (source.gaussian() != nullptr) {
    out.method = EntropyMethod::analytic;
    out.entropy = std::log(kTwoPiE) + 0.5 * std::log(1.0 - rho * rho);
    out.value = std::sqrt(1.0 - rho * rho);
    return out;
  }
  const auto& a = *source.additive();
  const MixtureEntropy hu = mixture_entropy(detail::sum_axis_mixture(a), opts);
  out.method = EntropyMethod::quadrature;
  out.entropy = hu.entropy + detail::gaussian_entropy(1.0 - rho);
  out.value = std::exp(out.entropy) / kTwoPiE;
  // d value = value * d h to first order.
  out.est_error = out.value * std::expm1(hu.est_error);
  return out;
}

/// N(X) = N(Y) (the model is symmetric in X and Y).
inline EntropyPowerValue marginal_entropy_power(
    const ValidatedSource& source, const QuadratureOptions& opts = {}) {
  detail::require_continuous(source);
  EntropyPowerValue out;
  if (source.gaussian() != nullptr) {
    out.method = EntropyMethod::analytic;
    out.entropy = detail::gaussian_entropy(1.0);
    out.value = 1.0;
    return out;
  }
  const MixtureEntropy hy =
      mixture_entropy(detail::marginal_mixture(*source.additive()), opts);
  out.method = EntropyMethod::quadrature;
  out.entropy = hy.entropy;
  out.value = std::exp(2.0 * hy.entropy) / kTwoPiE;
  out.est_error = out.value * std::expm1(2.0 * hy.est_error);
  return out;
}

/// N(X|Y), with h(X|Y) = h(X,Y) - h(Y).
inline EntropyPowerValue conditional_entropy_power(
    const ValidatedSource& source, const QuadratureOptions& opts = {}) {
  detail::require_continuous(source);
  const double rho = source.rho();
  EntropyPowerValue out;
  if (source.gaussian() != nullptr) {
    out.method = EntropyMethod::analytic;
    out.entropy = detail::gaussian_entropy(1.0 - rho * rho);
    out.value = 1.0 - rho * rho;
    return out;
  }
  const auto& a = *source.additive();
  const MixtureEntropy hu = mixture_entropy(detail::sum_axis_mixture(a), opts);
  const MixtureEntropy hy = mixture_entropy(detail::marginal_mixture(a), opts);
  out.method = EntropyMethod::quadrature;
  out.entropy = hu.entropy + detail::gaussian_entropy(1.0 - rho) - hy.entropy;
  out.value = std::exp(2.0 * out.entropy) / kTwoPiE;
  out.est_error = out.value * std::expm1(2.0 * (hu.est_error + hy.est_error));
  return out;
}

}  // namespace gwbounds
