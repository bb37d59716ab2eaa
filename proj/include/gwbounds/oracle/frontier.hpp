#pragma once

// Numerical estimate of R_c(R_p) = min I(X,Y;W) subject to
// R_{X|W}(delta) + R_{Y|W}(delta) <= R_p for a small discrete source and a
// small alphabet for W.
//
// Candidate test channels p(w|x,y) come from alternating minimization of the
// Lagrangian
//
//   I(X,Y;W) + lambda [ I(X;X_hat|W) + s_x E d(X,X_hat)
//                     + I(Y;Y_hat|W) + s_y E d(Y,Y_hat) ],
//
// where every block update (output laws, reproduction channels, p(w|x,y)) is
// a closed-form minimizer, and the slopes s_x, s_y are steered so that both
// distortions settle at delta. Each candidate is then scored exactly: I(X,Y;W)
// from the channel and the two conditional rate-distortion functions by
// Blahut-Arimoto at a common slope. The multiplier lambda is bisected to
// reach the private-rate budget. Restarts run from independent random
// channels; the smallest feasible I(X,Y;W) is reported. Nothing here is a
// certificate of global optimality, so the estimate sits above the infimum
// for the discrete instance.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "gwbounds/error.hpp"
#include "gwbounds/gw_bounds.hpp"
#include "gwbounds/oracle/blahut_arimoto.hpp"
#include "gwbounds/oracle/parallel.hpp"
#include "gwbounds/oracle/quantize.hpp"
#include "gwbounds/oracle/report.hpp"
#include "gwbounds/oracle/rng.hpp"

namespace gwbounds::oracle {

struct FrontierOptions {
  std::size_t alphabet = 4;
  std::size_t restarts = 32;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  double lambda_min = 0.25;
  double lambda_max = 4.0;
  std::size_t lambda_steps = 8;
  std::size_t max_iterations = 1000;
  double inner_tolerance = 1e-8;
  /// Allowed shortfall below the continuous parent's lower bound.
  double lower_slack = 0.02;
  /// Allowed excess above the parent's exact value (Gaussian parents only).
  double upper_slack = 0.08;
  /// Scoring only needs rates to well inside the verdict slack; the
  /// remaining certified gap is reported with the estimate.
  BlahutArimotoOptions ba{.tolerance = 1e-7,
                          .max_iterations = 2000,
                          .gap_limit = std::numeric_limits<double>::infinity(),
                          .distortion_tolerance = 1e-5,
                          .max_bisections = 200};
};

inline constexpr std::size_t kMaxFrontierAlphabet = 5;
inline constexpr std::size_t kMaxFrontierSide = 8;

struct FrontierCandidate {
  double information = std::numeric_limits<double>::infinity();
  double private_rate = std::numeric_limits<double>::infinity();
  double rate_x = 0.0;
  double rate_y = 0.0;
  double lambda = 0.0;
  std::size_t restart = 0;
  std::size_t letters_used = 0;
  /// Certified Blahut-Arimoto gap carried by rate_x + rate_y.
  double rate_gap = 0.0;
  /// Set for a time-shared pair: W = (Q, W_Q) uses the partner's channel
  /// with probability `share`.
  bool time_shared = false;
  double share = 0.0;
  std::size_t partner_restart = 0;

  bool feasible(double r_p) const { return private_rate <= r_p + 1e-9; }
};

namespace detail {

/// Channel p(w|x,y) stored as [(i * my + j) * K + w].
struct FrontierProblem {
  const QuantizedInstance& inst;
  DistortionTable tx;
  DistortionTable ty;
  std::size_t mx, my, k;
  double delta;

  FrontierProblem(const QuantizedInstance& q, std::size_t alphabet, double d)
      : inst(q),
        tx(q.joint.x_support, q.x_grid),
        ty(q.joint.y_support, q.y_grid),
        mx(q.joint.x_support.size()),
        my(q.joint.y_support.size()),
        k(alphabet),
        delta(d) {}

  double pxy(std::size_t i, std::size_t j) const { return inst.joint.at(i, j); }

  std::vector<double> letter_weights(const std::vector<double>& chan) const {
    std::vector<double> pw(k, 0.0);
    for (std::size_t i = 0; i < mx; ++i) {
      for (std::size_t j = 0; j < my; ++j) {
        for (std::size_t w = 0; w < k; ++w) {
          pw[w] += pxy(i, j) * chan[(i * my + j) * k + w];
        }
      }
    }
    return pw;
  }

  /// p(x|w) (axis 0) or p(y|w) (axis 1) as one vector per letter.
  std::vector<std::vector<double>> conditionals(const std::vector<double>& chan,
                                                const std::vector<double>& pw,
                                                int axis) const {
    const std::size_t m = axis == 0 ? mx : my;
    std::vector<std::vector<double>> out(k, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < mx; ++i) {
      for (std::size_t j = 0; j < my; ++j) {
        for (std::size_t w = 0; w < k; ++w) {
          out[w][axis == 0 ? i : j] += pxy(i, j) * chan[(i * my + j) * k + w];
        }
      }
    }
    for (std::size_t w = 0; w < k; ++w) {
      if (pw[w] <= 0.0) continue;
      for (double& v : out[w]) v /= pw[w];
    }
    return out;
  }

  double information(const std::vector<double>& chan,
                     const std::vector<double>& pw) const {
    double s = 0.0;
    for (std::size_t i = 0; i < mx; ++i) {
      for (std::size_t j = 0; j < my; ++j) {
        for (std::size_t w = 0; w < k; ++w) {
          const double c = chan[(i * my + j) * k + w];
          if (c > 0.0 && pw[w] > 0.0) s += pxy(i, j) * c * std::log(c / pw[w]);
        }
      }
    }
    return std::max(0.0, s);
  }

  /// One reproduction-side BA step for every letter on one axis. Updates
  /// `outputs` in place, fills the per-(symbol, letter) costs and returns the
  /// average distortion.
  double reproduction_step(const DistortionTable& table,
                           const std::vector<double>& kernel, double slope,
                           const std::vector<std::vector<double>>& cond,
                           const std::vector<double>& pw,
                           std::vector<std::vector<double>>& outputs,
                           std::vector<double>& cost) const {
    const std::size_t m = table.support_size(), r = table.grid_size();
    double dist = 0.0;
    std::vector<double> next(r);
    for (std::size_t w = 0; w < k; ++w) {
      auto& q = outputs[w];
      std::fill(next.begin(), next.end(), 0.0);
      double dw = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double* a = &kernel[i * r];
        double z = 0.0;
        for (std::size_t g = 0; g < r; ++g) z += q[g] * a[g];
        cost[i * k + w] = slope * table.row_min(i) - std::log(z);
        const double pi = cond[w][i];
        if (pi <= 0.0) continue;
        const double scale = pi / z;
        for (std::size_t g = 0; g < r; ++g) {
          const double t = scale * q[g] * a[g];
          next[g] += t;
          dw += t * table(i, g);
        }
      }
      if (pw[w] > 0.0) {
        q.swap(next);
        dist += pw[w] * dw;
      }
    }
    return dist;
  }
};

inline std::vector<double> random_channel(Philox4x32& rng, std::size_t cells,
                                          std::size_t k) {
  std::vector<double> chan(cells * k);
  for (std::size_t c = 0; c < cells; ++c) {
    double total = 0.0;
    for (std::size_t w = 0; w < k; ++w) {
      const double v = std::exp(1.5 * rng.normal());
      chan[c * k + w] = v;
      total += v;
    }
    for (std::size_t w = 0; w < k; ++w) chan[c * k + w] /= total;
  }
  return chan;
}

/// Alternating minimization of the Lagrangian at a fixed lambda.
inline std::vector<double> minimize_lagrangian(const FrontierProblem& prob,
                                               std::vector<double> chan,
                                               double lambda,
                                               const FrontierOptions& opts) {
  const std::size_t k = prob.k, mx = prob.mx, my = prob.my;
  double sx = 0.5 / prob.delta, sy = 0.5 / prob.delta;
  std::vector<std::vector<double>> qx(
      k, std::vector<double>(prob.tx.grid_size(), 1.0 / prob.tx.grid_size()));
  std::vector<std::vector<double>> qy(
      k, std::vector<double>(prob.ty.grid_size(), 1.0 / prob.ty.grid_size()));
  std::vector<double> ax(mx * k), ay(my * k);
  std::vector<double> logits(k);
  double prev = std::numeric_limits<double>::infinity();

  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    const auto pw = prob.letter_weights(chan);
    const auto cx = prob.conditionals(chan, pw, 0);
    const auto cy = prob.conditionals(chan, pw, 1);
    const double dx = prob.reproduction_step(prob.tx, prob.tx.kernel(sx), sx, cx, pw, qx, ax);
    const double dy = prob.reproduction_step(prob.ty, prob.ty.kernel(sy), sy, cy, pw, qy, ay);

    double lagrangian = prob.information(chan, pw);
    for (std::size_t i = 0; i < mx; ++i) {
      for (std::size_t j = 0; j < my; ++j) {
        const double p = prob.pxy(i, j);
        double* c = &chan[(i * my + j) * k];
        for (std::size_t w = 0; w < k; ++w) {
          lagrangian += lambda * p * c[w] * (ax[i * k + w] + ay[j * k + w]);
          logits[w] = pw[w] > 0.0
                          ? std::log(pw[w]) - lambda * (ax[i * k + w] + ay[j * k + w])
                          : -std::numeric_limits<double>::infinity();
        }
        const double lse = log_sum_exp(logits);
        for (std::size_t w = 0; w < k; ++w) c[w] = std::exp(logits[w] - lse);
      }
    }

    const double ex = dx / prob.delta, ey = dy / prob.delta;
    sx *= std::clamp(std::sqrt(ex), 0.5, 2.0);
    sy *= std::clamp(std::sqrt(ey), 0.5, 2.0);
    const bool settled = std::abs(ex - 1.0) < 1e-6 && std::abs(ey - 1.0) < 1e-6;
    if (settled &&
        std::abs(lagrangian - prev) < opts.inner_tolerance * (1.0 + std::abs(lagrangian))) {
      break;
    }
    prev = lagrangian;
  }
  return chan;
}

inline FrontierCandidate score(const FrontierProblem& prob,
                               const std::vector<double>& chan,
                               const FrontierOptions& opts) {
  const auto pw_all = prob.letter_weights(chan);
  FrontierCandidate c;
  c.information = prob.information(chan, pw_all);
  std::vector<double> pw;
  std::vector<std::vector<double>> cx, cy;
  const auto all_x = prob.conditionals(chan, pw_all, 0);
  const auto all_y = prob.conditionals(chan, pw_all, 1);
  for (std::size_t w = 0; w < prob.k; ++w) {
    if (pw_all[w] <= 1e-14) continue;
    pw.push_back(pw_all[w]);
    cx.push_back(all_x[w]);
    cy.push_back(all_y[w]);
  }
  c.letters_used = pw.size();
  const auto rx = ba_conditional_rate_distortion(prob.tx, cx, pw, prob.delta, opts.ba);
  const auto ry = ba_conditional_rate_distortion(prob.ty, cy, pw, prob.delta, opts.ba);
  c.rate_x = rx.rate;
  c.rate_y = ry.rate;
  c.rate_gap = rx.gap + ry.gap;
  c.private_rate = c.rate_x + c.rate_y;
  return c;
}

/// Bisects log(lambda) for one restart; returns the best feasible candidate
/// (information = +inf when none was feasible). Every scored channel is
/// appended to `scored`.
inline FrontierCandidate run_restart(const FrontierProblem& prob, double r_p,
                                     std::uint64_t seed, std::size_t restart,
                                     const FrontierOptions& opts,
                                     std::vector<FrontierCandidate>& scored) {
  Philox4x32 rng(seed, restart);
  const auto init = random_channel(rng, prob.mx * prob.my, prob.k);
  FrontierCandidate best;
  best.restart = restart;

  auto attempt = [&](double lambda) {
    const auto chan = minimize_lagrangian(prob, init, lambda, opts);
    FrontierCandidate c = score(prob, chan, opts);
    c.lambda = lambda;
    c.restart = restart;
    scored.push_back(c);
    if (c.feasible(r_p) && c.information < best.information) best = c;
    return c.feasible(r_p);
  };

  double lo = std::log(opts.lambda_min), hi = std::log(opts.lambda_max);
  if (!attempt(std::exp(hi))) return best;
  for (std::size_t s = 0; s < opts.lambda_steps; ++s) {
    const double mid = 0.5 * (lo + hi);
    if (attempt(std::exp(mid))) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return best;
}

/// Time sharing between an infeasible candidate a and a feasible b: with a
/// switch Q independent of (X,Y), W = (Q, W_Q) has I(X,Y;W) linear in the
/// share, and the mixed private rate bounds R_{X|W} + R_{Y|W} from above.
/// The share puts the mixed private rate exactly on r_p.
inline std::optional<FrontierCandidate> time_share(const FrontierCandidate& a,
                                                   const FrontierCandidate& b, double r_p,
                                                   std::size_t alphabet) {
  if (a.letters_used + b.letters_used > alphabet) return std::nullopt;
  if (!(a.private_rate > r_p) || !b.feasible(r_p) || !(b.private_rate < a.private_rate)) {
    return std::nullopt;
  }
  if (!std::isfinite(a.information) || !std::isfinite(b.information)) return std::nullopt;
  const double share = (a.private_rate - r_p) / (a.private_rate - b.private_rate);
  FrontierCandidate c = a;
  auto mix = [share](double x, double y) { return (1.0 - share) * x + share * y; };
  c.information = mix(a.information, b.information);
  c.rate_x = mix(a.rate_x, b.rate_x);
  c.rate_y = mix(a.rate_y, b.rate_y);
  c.private_rate = c.rate_x + c.rate_y;
  c.rate_gap = mix(a.rate_gap, b.rate_gap);
  c.letters_used = a.letters_used + b.letters_used;
  c.time_shared = true;
  c.share = share;
  c.partner_restart = b.restart;
  return c;
}

}  // namespace detail

struct FrontierResult {
  FrontierCandidate best;
  std::vector<FrontierCandidate> per_restart;
  /// True when W constant already meets the budget.
  bool trivial = false;
};

/// Runs the restarts and keeps the smallest feasible I(X,Y;W), including
/// time-shared pairs of scored channels.
inline FrontierResult frontier_search(const QuantizedInstance& inst, double delta,
                                      double r_p, const FrontierOptions& opts) {
  if (!opts.seed) {
    throw Error(ErrorKind::SeedRequired, "frontier estimate needs an explicit seed");
  }
  if (opts.alphabet < 1 || opts.alphabet > kMaxFrontierAlphabet) {
    throw Error(ErrorKind::BadConfig, "|W| must lie in 1..5");
  }
  if (inst.joint.x_support.size() > kMaxFrontierSide ||
      inst.joint.y_support.size() > kMaxFrontierSide) {
    throw Error(ErrorKind::BadConfig, "frontier estimate supports m <= 8");
  }
  const detail::FrontierProblem prob(inst, opts.alphabet, delta);
  FrontierResult out;

  const auto px = x_marginal(inst.joint);
  const auto py = y_marginal(inst.joint);
  double gx = 0.0, gy = 0.0;
  const double rx =
      ba_rate_distortion(px, inst.joint.x_support, inst.x_grid, delta, opts.ba, &gx);
  const double ry =
      ba_rate_distortion(py, inst.joint.y_support, inst.y_grid, delta, opts.ba, &gy);
  FrontierCandidate constant;
  constant.information = 0.0;
  constant.rate_x = rx;
  constant.rate_y = ry;
  constant.private_rate = rx + ry;
  constant.rate_gap = gx + gy;
  constant.letters_used = 1;
  if (rx + ry <= r_p) {
    out.trivial = true;
    out.best = constant;
    return out;
  }

  out.per_restart.resize(opts.restarts);
  std::vector<std::vector<FrontierCandidate>> scored(opts.restarts);
  parallel_for(opts.restarts, opts.jobs, [&](std::size_t r) {
    out.per_restart[r] = detail::run_restart(prob, r_p, *opts.seed, r, opts, scored[r]);
  });
  for (const auto& c : out.per_restart) {
    if (c.information < out.best.information) out.best = c;
  }
  // Pairs of scored channels, and each channel with the constant W, can be
  // time-shared when their alphabets fit together.
  std::vector<FrontierCandidate> pool = {constant};
  for (const auto& s : scored) pool.insert(pool.end(), s.begin(), s.end());
  for (const auto& a : pool) {
    for (const auto& b : pool) {
      const auto c = detail::time_share(a, b, r_p, opts.alphabet);
      if (c && c->information < out.best.information) out.best = *c;
    }
  }
  if (!std::isfinite(out.best.information)) {
    throw Error(ErrorKind::NoFeasiblePointFound,
                "no restart met the private-rate budget");
  }
  return out;
}

/// Frontier estimate as an oracle report. The estimate is compared
/// one-sidedly against the continuous parent's lower bound and, for a
/// quantized Gaussian, two-sidedly against the exact Gaussian value.
inline OracleReport gw_frontier_estimate(const QuantizedInstance& inst,
                                         double delta, double r_p,
                                         const FrontierOptions& opts) {
  const FrontierResult res = frontier_search(inst, delta, r_p, opts);
  const double rho = inst.parent_rho;
  const double n_parent = std::sqrt(1.0 - rho * rho);
  const double lower = thm1_lower(n_parent, rho, delta, r_p).r_c;
  const double exact = gaussian_exact(rho, delta, r_p).r_c;
  const double est = res.best.information;

  OracleReport report;
  report.oracle = "gw_frontier_estimate";
  report.inputs = {{"provenance", inst.provenance},
                   {"m", inst.joint.x_support.size()},
                   {"grid_points", inst.x_grid.size()},
                   {"delta", delta},
                   {"r_p", r_p},
                   {"alphabet", opts.alphabet},
                   {"restarts", opts.restarts},
                   {"seed", *opts.seed},
                   {"lambda_range", {opts.lambda_min, opts.lambda_max}},
                   {"lambda_steps", opts.lambda_steps}};
  report.details = {{"quantized_rho", inst.rho},
                    {"parent_rho", rho},
                    {"lower_slack", opts.lower_slack},
                    {"upper_slack", opts.upper_slack},
                    {"trivial", res.trivial},
                    {"private_rate", res.best.private_rate},
                    {"rate_x", res.best.rate_x},
                    {"rate_y", res.best.rate_y},
                    {"lambda", res.best.lambda},
                    {"restart", res.best.restart},
                    {"letters_used", res.best.letters_used},
                    {"rate_gap", res.best.rate_gap},
                    {"time_shared", res.best.time_shared},
                    {"share", res.best.share}};
  report.checks.push_back(OracleCheck::make(
      "above_parent_lower_bound", est, lower - opts.lower_slack,
      std::numeric_limits<double>::infinity(), 0.0));
  report.checks.push_back(OracleCheck::make("gaussian_exact_bracket", est,
                                            exact - opts.lower_slack,
                                            exact + opts.upper_slack, 0.0));
  return report;
}

}  // namespace gwbounds::oracle
