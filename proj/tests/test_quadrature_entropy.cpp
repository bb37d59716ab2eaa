#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gwbounds/entropy_power.hpp"
#include "gwbounds/oracle/rng.hpp"
#include "gwbounds/quadrature.hpp"

using namespace gwbounds;

namespace {

AdditiveChannelSpec two_point(double rho, double st) {
  const double a = std::sqrt(st);
  return {rho, st, {{-a, 0.5}, {a, 0.5}}, 1.0};
}

/// h(X,Y) by a 2-D trapezoid rule on [-L, L]^2, independent of the 1-D path.
double pair_entropy_2d(const AdditiveChannelSpec& s, double step = 0.02, double half = 9.0) {
  const double v = 1.0 - s.sigma_theta2, c = s.rho - s.sigma_theta2;
  const double det = v * v - c * c;
  const double norm = 1.0 / (2.0 * std::numbers::pi * std::sqrt(det));
  double h = 0.0;
  const int n = static_cast<int>(std::round(2.0 * half / step));
  for (int i = 0; i <= n; ++i) {
    const double x = -half + step * i;
    for (int j = 0; j <= n; ++j) {
      const double y = -half + step * j;
      double f = 0.0;
      for (const auto& atom : s.theta_law) {
        const double dx = x - atom.value, dy = y - atom.value;
        const double q = (v * dx * dx - 2.0 * c * dx * dy + v * dy * dy) / det;
        f += atom.prob * norm * std::exp(-0.5 * q);
      }
      if (f > 0.0) h -= f * std::log(f);
    }
  }
  return h * step * step;
}

}  // namespace

TEST(MixtureEntropy, SingleGaussian) {
  for (double var : {0.01, 0.5, 1.0, 7.0}) {
    const auto e = mixture_entropy({{1.0, 0.3, var}});
    EXPECT_NEAR(e.entropy, 0.5 * std::log(kTwoPiE * var), 1e-12);
    EXPECT_LE(e.est_error, 1e-6);
  }
}

TEST(MixtureEntropy, PanelDoublingConverges) {
  const GaussianMixture1D mix = {{0.3, -2.0, 0.4}, {0.7, 1.5, 0.9}};
  const MixtureDomain d = mixture_domain(mix);
  const double fine = mixture_entropy_fixed(mix, d, 4096);
  double prev_err = INFINITY;
  for (std::size_t p : {8u, 16u, 32u, 64u}) {
    const double err = std::abs(mixture_entropy_fixed(mix, d, p) - fine);
    EXPECT_LE(err, prev_err + 1e-15);
    prev_err = err;
  }
  EXPECT_NEAR(mixture_entropy(mix).entropy, fine, 1e-12);
}

TEST(MixtureEntropy, WellSeparatedComponents) {
  // Far-apart equal components: h = h(N(0, v)) + ln 2.
  const auto e = mixture_entropy({{0.5, -40.0, 1.0}, {0.5, 40.0, 1.0}});
  EXPECT_NEAR(e.entropy, 0.5 * std::log(kTwoPiE) + std::log(2.0), 1e-10);
}

TEST(MixtureEntropy, BudgetEnforced) {
  QuadratureOptions o;
  o.max_panels = 8;
  o.budget = 1e-14;
  EXPECT_THROW(mixture_entropy({{0.5, -3.0, 0.01}, {0.5, 3.0, 0.01}}, o), Error);
}

TEST(EntropyPower, GaussianAnalytic) {
  const auto g = validate(GaussianPairSpec{0.6, 2.0});
  EXPECT_NEAR(pair_entropy_power(g).value, 0.8, 1e-15);
  EXPECT_EQ(pair_entropy_power(g).method, EntropyMethod::analytic);
  EXPECT_NEAR(marginal_entropy_power(g).value, 1.0, 1e-15);
  EXPECT_NEAR(conditional_entropy_power(g).value, 0.64, 1e-15);
}

TEST(EntropyPower, DiscreteRejected) {
  const auto d = validate(DiscreteJointSpec{{-1.0, 1.0}, {-1.0, 1.0}, {0.4, 0.1, 0.1, 0.4}});
  EXPECT_THROW(pair_entropy_power(d), Error);
}

TEST(EntropyPower, PairMatchesTwoDimensionalIntegral) {
  for (auto [rho, st] : {std::pair{0.6, 0.2}, std::pair{0.4, 0.1}, std::pair{0.8, 0.7}}) {
    const auto spec = two_point(rho, st);
    const auto v = pair_entropy_power(validate(spec));
    EXPECT_NEAR(v.entropy, pair_entropy_2d(spec), 1e-6) << rho << " " << st;
  }
}

TEST(EntropyPower, CollapseToGaussian) {
  for (double rho : {0.4, 0.6}) {
    const auto v = pair_entropy_power(validate(two_point(rho, 1e-8)));
    EXPECT_NEAR(v.value, std::sqrt(1.0 - rho * rho), 1e-7);
    const auto c = conditional_entropy_power(validate(two_point(rho, 1e-8)));
    EXPECT_NEAR(c.value, 1.0 - rho * rho, 1e-7);
  }
}

TEST(EntropyPower, NeverAboveGaussianPair) {
  oracle::Philox4x32 rng(5, 0);
  for (int k = 0; k < 30; ++k) {
    const double rho = 0.05 + 0.9 * rng.uniform();
    const double st = rho * rng.uniform();
    const std::size_t atoms = 2 + static_cast<std::size_t>(rng.uniform() * 3.0);
    std::vector<double> vals, probs;
    double pt = 0.0;
    for (std::size_t i = 0; i < atoms; ++i) {
      vals.push_back(rng.normal());
      probs.push_back(0.1 + rng.uniform());
      pt += probs.back();
    }
    double mean = 0.0, second = 0.0;
    for (std::size_t i = 0; i < atoms; ++i) {
      probs[i] /= pt;
      mean += probs[i] * vals[i];
    }
    for (std::size_t i = 0; i < atoms; ++i) {
      vals[i] -= mean;
      second += probs[i] * vals[i] * vals[i];
    }
    AdditiveChannelSpec s{rho, st, {}, 1.0};
    for (std::size_t i = 0; i < atoms; ++i) {
      s.theta_law.push_back({vals[i] * std::sqrt(st / second), probs[i]});
    }
    double var = 0.0, m2 = 0.0;
    for (const auto& a : s.theta_law) {
      m2 += a.prob * a.value;
      var += a.prob * a.value * a.value;
    }
    s.sigma_theta2 = var - m2 * m2;
    const auto n = pair_entropy_power(validate(s));
    EXPECT_LE(n.value, std::sqrt(1.0 - rho * rho) + 1e-6);
  }
}
