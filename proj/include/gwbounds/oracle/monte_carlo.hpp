#pragma once

// Monte-Carlo checks of the two size-one auxiliary constructions. Samples are
// drawn in independent batches, batch b from the Philox stream (seed, b);
// point estimates use the pooled moments and standard errors the spread of
// the per-batch estimates.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "gwbounds/error.hpp"
#include "gwbounds/gw_bounds.hpp"
#include "gwbounds/oracle/parallel.hpp"
#include "gwbounds/oracle/report.hpp"
#include "gwbounds/oracle/rng.hpp"
#include "gwbounds/source_models.hpp"

namespace gwbounds::oracle {

struct MonteCarloOptions {
  std::size_t n_samples = 1'000'000;
  std::optional<std::uint64_t> seed;
  std::size_t batches = 100;
  std::size_t jobs = 1;
  /// Verdict tolerance in standard errors.
  double sigmas = 4.0;
};

/// Raw first and second moments of (X, Y, W).
struct TripleMoments {
  double n = 0.0;
  std::array<double, 3> s{};       // sums of x, y, w
  std::array<double, 6> ss{};      // xx, yy, ww, xy, xw, yw

  void add(double x, double y, double w) {
    n += 1.0;
    s[0] += x; s[1] += y; s[2] += w;
    ss[0] += x * x; ss[1] += y * y; ss[2] += w * w;
    ss[3] += x * y; ss[4] += x * w; ss[5] += y * w;
  }

  void merge(const TripleMoments& o) {
    n += o.n;
    for (std::size_t i = 0; i < 3; ++i) s[i] += o.s[i];
    for (std::size_t i = 0; i < 6; ++i) ss[i] += o.ss[i];
  }

  /// Covariance between components a, b in {0: x, 1: y, 2: w}.
  double cov(int a, int b) const {
    static constexpr int kIndex[3][3] = {{0, 3, 4}, {3, 1, 5}, {4, 5, 2}};
    return ss[kIndex[a][b]] / n - (s[a] / n) * (s[b] / n);
  }

  /// Var(A) - Cov(A,W)^2 / Var(W): residual of the linear regression on W.
  double residual(int a) const {
    const double vw = cov(2, 2);
    if (!(vw > 1e-300)) return cov(a, a);
    const double c = cov(a, 2);
    return cov(a, a) - c * c / vw;
  }

  double slope(int a) const { return cov(a, 2) / cov(2, 2); }

  /// I(X,Y;W) of a Gaussian vector with these second moments.
  double gaussian_information() const {
    const double xx = cov(0, 0), yy = cov(1, 1), ww = cov(2, 2);
    const double xy = cov(0, 1), xw = cov(0, 2), yw = cov(1, 2);
    const double det_xy = xx * yy - xy * xy;
    const double det = xx * (yy * ww - yw * yw) - xy * (xy * ww - yw * xw) +
                       xw * (xy * yw - yy * xw);
    return 0.5 * std::log(ww * det_xy / det);
  }
};

namespace detail {

inline std::uint64_t require_seed(const MonteCarloOptions& opts) {
  if (!opts.seed) {
    throw Error(ErrorKind::SeedRequired, "Monte-Carlo oracles need an explicit seed");
  }
  return *opts.seed;
}

template <class Sampler>
std::vector<TripleMoments> run_batches(const MonteCarloOptions& opts,
                                       std::uint64_t seed, Sampler&& sample) {
  const std::size_t batches = std::max<std::size_t>(2, opts.batches);
  std::vector<TripleMoments> out(batches);
  parallel_for(batches, opts.jobs, [&](std::size_t b) {
    Philox4x32 rng(seed, b);
    const std::size_t count = opts.n_samples / batches +
                              (b < opts.n_samples % batches ? 1 : 0);
    TripleMoments m;
    for (std::size_t i = 0; i < count; ++i) {
      const auto [x, y, w] = sample(rng);
      m.add(x, y, w);
    }
    out[b] = m;
  });
  return out;
}

/// Pooled estimate and batch-spread standard error of stat(moments).
template <class Stat>
std::pair<double, double> estimate(const std::vector<TripleMoments>& batches,
                                   Stat&& stat) {
  TripleMoments pooled;
  for (const auto& b : batches) pooled.merge(b);
  const double k = static_cast<double>(batches.size());
  double mean = 0.0;
  std::vector<double> values;
  values.reserve(batches.size());
  for (const auto& b : batches) {
    values.push_back(stat(b));
    mean += values.back();
  }
  mean /= k;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= (k - 1.0);
  return {stat(pooled), std::sqrt(var / k)};
}

}  // namespace detail

/// Samples a unit Gaussian pair, forms W = alpha (X + Y) + N and checks the
/// conditional variance E[Var(X|W)] = t and I(X,Y;W) against the closed form.
inline OracleReport mc_construction_c(double rho, double delta, double r_p,
                                      const MonteCarloOptions& opts) {
  const std::uint64_t seed = detail::require_seed(opts);
  const ConstructionC c = construction_c(rho, delta, r_p);
  const double mix = std::sqrt(1.0 - rho * rho);
  const double noise_sd = std::sqrt(c.noise_variance);

  const auto batches = detail::run_batches(opts, seed, [&](Philox4x32& rng) {
    const double x = rng.normal();
    const double y = rho * x + mix * rng.normal();
    const double w = c.alpha * (x + y) + noise_sd * rng.normal();
    return std::array<double, 3>{x, y, w};
  });

  OracleReport report;
  report.oracle = "mc_construction_c";
  report.inputs = {{"rho", rho},
                   {"delta", delta},
                   {"r_p", r_p},
                   {"n_samples", opts.n_samples},
                   {"seed", seed},
                   {"batches", batches.size()}};
  report.details = {{"alpha", c.alpha},
                    {"noise_variance", c.noise_variance},
                    {"scaled_distortion", c.t}};

  const auto [resid, resid_se] =
      detail::estimate(batches, [](const TripleMoments& m) { return m.residual(0); });
  report.checks.push_back(OracleCheck::make(
      "conditional_variance", resid, c.t, c.t, opts.sigmas * resid_se, resid_se));

  const auto [info, info_se] = detail::estimate(
      batches, [](const TripleMoments& m) { return m.gaussian_information(); });
  const double predicted = c.predicted_information();
  report.checks.push_back(OracleCheck::make(
      "mutual_information", info, predicted, predicted, opts.sigmas * info_se, info_se));

  report.checks.push_back(
      OracleCheck::make("w_variance_identity", c.w_variance(), 1.0, 1.0, 1e-12));
  return report;
}

/// Samples the additive model through W = theta + sqrt(alpha_d) V and checks
/// E[Var(X|W)] = E[Var(Y|W)] = 1 - sigma_theta2 - alpha_d, the regression
/// slope E[X|W] = W and the induced private sum-rate.
inline OracleReport mc_construction_d(const ValidatedSource& source,
                                      double delta, double r_p,
                                      const MonteCarloOptions& opts) {
  const std::uint64_t seed = detail::require_seed(opts);
  const auto* a = source.additive();
  if (a == nullptr) {
    throw Error(ErrorKind::BadConfig, "construction D needs an additive channel source");
  }
  const ConstructionD d = construction_d(a->rho, a->sigma_theta2, delta, r_p);

  std::vector<double> cdf;
  double acc = 0.0;
  for (const auto& atom : a->theta_law) {
    acc += atom.prob;
    cdf.push_back(acc);
  }
  const double v_sd = std::sqrt(d.alpha_d);
  const double nv = d.noise_variance(), nc = d.noise_covariance();
  const double common_sd = std::sqrt(std::max(0.0, 0.5 * (nv + nc)));
  const double diff_sd = std::sqrt(std::max(0.0, 0.5 * (nv - nc)));

  const auto batches = detail::run_batches(opts, seed, [&](Philox4x32& rng) {
    const double u = rng.uniform() * acc;
    const std::size_t k = std::min<std::size_t>(
        static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin()),
        cdf.size() - 1);
    const double w = a->theta_law[k].value + v_sd * rng.normal();
    const double g1 = rng.normal(), g2 = rng.normal();
    const double x = w + common_sd * g1 + diff_sd * g2;
    const double y = w + common_sd * g1 - diff_sd * g2;
    return std::array<double, 3>{x, y, w};
  });

  OracleReport report;
  report.oracle = "mc_construction_d";
  report.inputs = {{"rho", a->rho},
                   {"sigma_theta2", a->sigma_theta2},
                   {"delta", delta},
                   {"r_p", r_p},
                   {"n_samples", opts.n_samples},
                   {"seed", seed},
                   {"batches", batches.size()}};
  report.details = {{"alpha_d", d.alpha_d},
                    {"noise_variance", nv},
                    {"noise_covariance", nc}};

  const double target = d.conditional_variance();
  for (int comp : {0, 1}) {
    const auto [resid, se] = detail::estimate(
        batches, [comp](const TripleMoments& m) { return m.residual(comp); });
    report.checks.push_back(OracleCheck::make(
        comp == 0 ? "conditional_variance_x" : "conditional_variance_y", resid,
        target, target, opts.sigmas * se, se));
  }
  if (d.w_variance() > 0.0) {
    const auto [slope, se] = detail::estimate(
        batches, [](const TripleMoments& m) { return m.slope(0); });
    report.checks.push_back(
        OracleCheck::make("regression_slope_x", slope, 1.0, 1.0, opts.sigmas * se, se));
  }
  const auto [rate, rate_se] = detail::estimate(batches, [delta](const TripleMoments& m) {
    return 0.5 * std::log(m.residual(0) * m.residual(1) / (delta * delta));
  });
  const double induced = d.induced_private_rate(delta);
  report.checks.push_back(OracleCheck::make("private_rate", rate, induced, induced,
                                            opts.sigmas * rate_se, rate_se));
  report.details["induced_private_rate"] = induced;
  return report;
}

}  // namespace gwbounds::oracle
