#pragma once

// Source descriptions for the Gray-Wyner bounds and their standardization.
//
// Every bound in this library is stated for unit-variance pairs. A validated
// source therefore carries its standardized form together with the original
// marginal variance, which is only used to rescale the distortion budget
// (delta -> delta / sigma2) and for reporting.

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gwbounds/error.hpp"

namespace gwbounds {

/// Jointly Gaussian pair with common marginal variance.
struct GaussianPairSpec {
  double rho = 0.0;
  double sigma2 = 1.0;

  bool operator==(const GaussianPairSpec&) const = default;
};

struct ThetaAtom {
  double value = 0.0;
  double prob = 0.0;

  bool operator==(const ThetaAtom&) const = default;
};

/// X = theta + Z_x, Y = theta + Z_y with (Z_x, Z_y) jointly Gaussian and
/// independent of a finite discrete theta. theta_law and sigma_theta2 are in
/// source units; sigma2 is the common marginal variance of X and Y.
struct AdditiveChannelSpec {
  double rho = 0.0;
  double sigma_theta2 = 0.0;
  std::vector<ThetaAtom> theta_law;
  double sigma2 = 1.0;

  bool operator==(const AdditiveChannelSpec&) const = default;
};

/// Tabulated joint pmf on x_support x y_support, stored row-major
/// (pmf[i * y_support.size() + j] = P(X = x_i, Y = y_j)).
struct DiscreteJointSpec {
  std::vector<double> x_support;
  std::vector<double> y_support;
  std::vector<double> pmf;

  double at(std::size_t i, std::size_t j) const {
    return pmf[i * y_support.size() + j];
  }

  bool operator==(const DiscreteJointSpec&) const = default;
};

using SourceSpec =
    std::variant<GaussianPairSpec, AdditiveChannelSpec, DiscreteJointSpec>;

enum class SourceKind { gaussian, additive_channel, discrete };

inline const char* to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::gaussian: return "gaussian";
    case SourceKind::additive_channel: return "additive_channel";
    case SourceKind::discrete: return "discrete";
  }
  return "unknown";
}

class ValidatedSource;
ValidatedSource validate(const SourceSpec& spec);
ValidatedSource validate(const ValidatedSource& source);

/// A source that passed validation, held in unit-variance form.
class ValidatedSource {
 public:
  /// Unit-variance form of the source (sigma2 fields equal 1).
  const SourceSpec& standardized() const { return spec_; }
  /// Marginal variance of the source as supplied by the user.
  double sigma2() const { return sigma2_; }
  double rho() const { return rho_; }
  SourceKind kind() const { return static_cast<SourceKind>(spec_.index()); }

  const GaussianPairSpec* gaussian() const {
    return std::get_if<GaussianPairSpec>(&spec_);
  }
  const AdditiveChannelSpec* additive() const {
    return std::get_if<AdditiveChannelSpec>(&spec_);
  }
  const DiscreteJointSpec* discrete() const {
    return std::get_if<DiscreteJointSpec>(&spec_);
  }

  /// Variance of theta in standardized units; 0 for non-additive sources.
  double sigma_theta2() const {
    if (const auto* a = additive()) return a->sigma_theta2;
    return 0.0;
  }

  /// Maps a distortion level in source units to the unit-variance scale.
  double normalize_distortion(double delta) const {
    if (!(delta > 0.0) || !(delta <= sigma2_)) {
      throw Error(ErrorKind::BadDistortion,
                  "distortion must satisfy 0 < delta <= sigma2 (delta = " +
                      std::to_string(delta) +
                      ", sigma2 = " + std::to_string(sigma2_) + ")");
    }
    return delta / sigma2_;
  }

  bool operator==(const ValidatedSource&) const = default;

 private:
  ValidatedSource(SourceSpec spec, double sigma2, double rho)
      : spec_(std::move(spec)), sigma2_(sigma2), rho_(rho) {}

  friend ValidatedSource validate(const SourceSpec& spec);
  friend ValidatedSource validate(const ValidatedSource& source);

  SourceSpec spec_;
  double sigma2_;
  double rho_;
};

namespace detail {

inline constexpr double kPmfTolerance = 1e-12;
inline constexpr double kMomentTolerance = 1e-12;

inline void check_rho(double rho) {
  if (!(rho >= 0.0) || !(rho < 1.0)) {
    throw Error(ErrorKind::RhoOutOfRange,
                "rho must lie in [0, 1) (got " + std::to_string(rho) +
                    "); for negative correlation negate Y");
  }
}

inline void check_probabilities(const std::vector<double>& probs,
                                 const char* what) {
  if (probs.empty()) {
    throw Error(ErrorKind::BadPmf, std::string(what) + " is empty");
  }
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error(ErrorKind::BadPmf,
                  std::string(what) + " has a negative or non-finite entry");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > kPmfTolerance) {
    throw Error(ErrorKind::BadPmf, std::string(what) + " sums to " +
                                       std::to_string(total) + ", not 1");
  }
}

inline GaussianPairSpec standardize(const GaussianPairSpec& s) {
  check_rho(s.rho);
  if (!(s.sigma2 > 0.0) || !std::isfinite(s.sigma2)) {
    throw Error(ErrorKind::ZeroVariance, "sigma2 must be positive");
  }
  return GaussianPairSpec{s.rho, 1.0};
}

inline AdditiveChannelSpec standardize(const AdditiveChannelSpec& s) {
  check_rho(s.rho);
  if (!(s.sigma2 > 0.0) || !std::isfinite(s.sigma2)) {
    throw Error(ErrorKind::ZeroVariance, "sigma2 must be positive");
  }
  std::vector<double> probs;
  probs.reserve(s.theta_law.size());
  for (const auto& atom : s.theta_law) probs.push_back(atom.prob);
  check_probabilities(probs, "theta_law");

  double mean = 0.0;
  double second = 0.0;
  for (const auto& atom : s.theta_law) {
    mean += atom.prob * atom.value;
    second += atom.prob * atom.value * atom.value;
  }
  const double scale = std::max(1.0, s.sigma_theta2);
  if (std::abs(mean) > kMomentTolerance * std::max(1.0, std::sqrt(scale))) {
    throw Error(ErrorKind::BadPmf, "theta_law must have zero mean");
  }
  if (!(s.sigma_theta2 >= 0.0) ||
      std::abs(second - mean * mean - s.sigma_theta2) >
          kMomentTolerance * scale) {
    throw Error(ErrorKind::BadPmf,
                "theta_law variance does not match sigma_theta2");
  }

  const double s2 = s.sigma_theta2 / s.sigma2;
  if (s2 > s.rho + kMomentTolerance) {
    throw Error(ErrorKind::NonPSDCovariance,
                "sigma_theta2 / sigma2 = " + std::to_string(s2) +
                    " exceeds rho = " + std::to_string(s.rho) +
                    "; the Gaussian noise covariance would not be PSD");
  }

  AdditiveChannelSpec out;
  out.rho = s.rho;
  out.sigma2 = 1.0;
  out.sigma_theta2 = std::min(s2, s.rho);
  if (s.sigma2 == 1.0) {
    out.theta_law = s.theta_law;
  } else {
    const double inv_sigma = 1.0 / std::sqrt(s.sigma2);
    out.theta_law.reserve(s.theta_law.size());
    for (const auto& atom : s.theta_law) {
      out.theta_law.push_back({atom.value * inv_sigma, atom.prob});
    }
  }
  return out;
}

struct DiscreteMoments {
  double mean_x = 0.0, mean_y = 0.0;
  double var_x = 0.0, var_y = 0.0;
  double cov = 0.0;
};

inline DiscreteMoments moments(const DiscreteJointSpec& s) {
  DiscreteMoments m;
  const std::size_t nx = s.x_support.size(), ny = s.y_support.size();
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      const double p = s.at(i, j);
      m.mean_x += p * s.x_support[i];
      m.mean_y += p * s.y_support[j];
    }
  }
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      const double p = s.at(i, j);
      const double dx = s.x_support[i] - m.mean_x;
      const double dy = s.y_support[j] - m.mean_y;
      m.var_x += p * dx * dx;
      m.var_y += p * dy * dy;
      m.cov += p * dx * dy;
    }
  }
  return m;
}

inline std::pair<DiscreteJointSpec, double> standardize(
    const DiscreteJointSpec& s) {
  if (s.x_support.empty() || s.y_support.empty() ||
      s.pmf.size() != s.x_support.size() * s.y_support.size()) {
    throw Error(ErrorKind::BadPmf,
                "pmf must be a |x_support| x |y_support| row-major matrix");
  }
  check_probabilities(s.pmf, "pmf");
  const DiscreteMoments m = moments(s);
  if (!(m.var_x > 0.0) || !(m.var_y > 0.0)) {
    throw Error(ErrorKind::ZeroVariance, "a marginal of the pmf is constant");
  }

  DiscreteJointSpec out = s;
  const bool already_standard =
      std::abs(m.mean_x) <= kMomentTolerance &&
      std::abs(m.mean_y) <= kMomentTolerance &&
      std::abs(m.var_x - 1.0) <= kMomentTolerance &&
      std::abs(m.var_y - 1.0) <= kMomentTolerance;
  if (!already_standard) {
    const double sx = std::sqrt(m.var_x), sy = std::sqrt(m.var_y);
    for (double& x : out.x_support) x = (x - m.mean_x) / sx;
    for (double& y : out.y_support) y = (y - m.mean_y) / sy;
  }
  double rho = m.cov / std::sqrt(m.var_x * m.var_y);
  if (rho < 0.0 && rho > -kMomentTolerance) rho = 0.0;
  check_rho(rho);
  return {std::move(out), m.var_x};
}

}  // namespace detail

/// Checks every source invariant and returns the unit-variance form.
inline ValidatedSource validate(const SourceSpec& spec) {
  return std::visit(
      [](const auto& s) -> ValidatedSource {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, DiscreteJointSpec>) {
          auto [standard, sigma2] = detail::standardize(s);
          const double rho = detail::moments(standard).cov;
          return ValidatedSource(SourceSpec(std::move(standard)), sigma2,
                                 rho < 0.0 ? 0.0 : rho);
        } else {
          auto standard = detail::standardize(s);
          const double rho = standard.rho;
          return ValidatedSource(SourceSpec(std::move(standard)), s.sigma2,
                                 rho);
        }
      },
      spec);
}

/// Re-validation is a fixed point: the standardized form is already unit
/// variance, so only the invariants are re-checked.
inline ValidatedSource validate(const ValidatedSource& source) {
  ValidatedSource again = validate(source.standardized());
  again.sigma2_ = source.sigma2_;
  again.rho_ = source.rho_;
  return again;
}

/// Pearson correlation of the standardized pair.
inline double effective_correlation(const ValidatedSource& source) {
  return source.rho();
}

}  // namespace gwbounds
