// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gwbounds/gwbounds.hpp"
#include "random_profiles.hpp"

namespace fs = std::filesystem;
using namespace gwbounds;
using namespace gwbounds::oracle;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  return g;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

const std::vector<double> kRhos = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
const std::vector<double> kDeltas = {0.05, 0.1, 0.2};

/// 101 points from 0 into the saturated regime.
std::vector<double> sweep_grid(double delta) {
  return linear_grid(0.0, std::log(1.0 / delta) + 0.5, 101);
}

AdditiveChannelSpec two_point(double rho, double st) {
  const double a = std::sqrt(st);
  return {rho, st, {{-a, 0.5}, {a, 0.5}}, 1.0};
}

/// h(X,Y) of a unit additive source by a 2-D trapezoid rule.
double pair_entropy_2d(const AdditiveChannelSpec& s, double step = 0.02, double half = 9.0) {
  const double v = 1.0 - s.sigma_theta2, c = s.rho - s.sigma_theta2;
  const double det = v * v - c * c;
  const double norm = 1.0 / (2.0 * std::numbers::pi * std::sqrt(det));
  const int n = static_cast<int>(std::round(2.0 * half / step));
  double h = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = -half + step * i;
    for (int j = 0; j <= n; ++j) {
      const double y = -half + step * j;
      double f = 0.0;
      for (const auto& atom : s.theta_law) {
        const double dx = x - atom.value, dy = y - atom.value;
        f += atom.prob * norm * std::exp(-0.5 * (v * dx * dx - 2.0 * c * dx * dy + v * dy * dy) / det);
      }
      if (f > 0.0) h -= f * std::log(f);
    }
  }
  return h * step * step;
}

Outcome criterion1() {
  Outcome o;
  double worst = 0.0;
  for (double rho : kRhos) {
    const double n = std::sqrt(1.0 - rho * rho);
    for (double delta : kDeltas) {
      for (double r : sweep_grid(delta)) {
        const double lo = thm1_lower(n, rho, delta, r).r_c;
        const double up = thm1_upper(rho, delta, r).r_c;
        const double ex = gaussian_exact(rho, delta, r).r_c;
        worst = std::max({worst, std::abs(lo - up), std::abs(lo - ex)});
      }
    }
  }
  o.require(worst <= 1e-12, fmt("max deviation %.3g", worst));
  o.detail = o.pass ? fmt("max |lower-upper|,|lower-exact| = %.3g nats", worst) : o.detail;
  return o;
}

Outcome criterion2() {
  Outcome o;
  double worst_jump = 0.0, worst_rise = 0.0, worst_conv = 0.0, worst_line = 0.0;
  for (double rho : kRhos) {
    const double n = std::sqrt(1.0 - rho * rho);
    for (double delta : kDeltas) {
      const auto g = sweep_grid(delta);
      std::vector<double> v;
      for (double r : g) v.push_back(gaussian_exact(rho, delta, r).r_c);
      for (std::size_t i = 1; i < v.size(); ++i) worst_rise = std::max(worst_rise, v[i] - v[i - 1]);
      for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        worst_conv = std::min(worst_conv, v[i + 1] - 2.0 * v[i] + v[i - 1]);
      }
      const double b = std::log((1.0 - rho) / delta);
      if (b > 0.0) {
        const double left = thm1_lower(n, rho, delta, std::nextafter(b, 0.0)).r_c;
        const double at = thm1_lower(n, rho, delta, b).r_c;
        worst_jump = std::max(worst_jump, std::abs(left - at));
      }
      for (double r : g) {
        const auto p = thm1_lower(n, rho, delta, r);
        if (p.regime == Regime::low && p.r_c > 0.0) {
          worst_line = std::max(worst_line, std::abs(p.r_c + r - std::log(n / delta)));
        }
      }
    }
  }
  o.require(worst_jump < 1e-12, fmt("boundary jump %.3g", worst_jump));
  o.require(worst_rise <= 0.0, fmt("curve rises by %.3g", worst_rise));
  o.require(worst_conv >= -1e-9, fmt("second difference %.3g", worst_conv));
  o.require(worst_line <= 1e-12, fmt("low-regime line off by %.3g", worst_line));
  if (o.pass) {
    o.detail = fmt("jump %.2g, min second diff %.2g, slope -1 line err %.2g", worst_jump,
                   worst_conv, worst_line);
  }
  return o;
}

Outcome criterion3() {
  Outcome o;
  double worst_excess = -INFINITY, worst_d1 = 0.0, worst_d2 = 0.0, worst_val = 0.0;
  std::vector<double> n_factors = {1.0, 0.93};
  for (double rho : kRhos) {
    for (double factor : n_factors) {
      const double n = std::sqrt(1.0 - rho * rho) * factor;
      for (double delta : kDeltas) {
        const double r_top = std::log(1.0 / delta);
        for (double r : linear_grid(0.0, r_top, 11)) {
          const auto opt = dual_maximize(n, rho, delta, r);
          const double lo = 1.0 / (1.0 + rho);
          for (double nu = lo; nu <= 1.0; nu += 1e-4) {
            worst_excess =
                std::max(worst_excess, dual_ell(nu, n, rho, delta, r).ell - opt.state.ell);
          }
          for (double nu : linear_grid(lo + 1e-3, 1.0 - 2e-5, 25)) {
            const auto s = dual_ell(nu, n, rho, delta, r);
            const double h = 1e-5;
            const double fd = (dual_ell(nu + h, n, rho, delta, r).ell -
                               dual_ell(nu - h, n, rho, delta, r).ell) / (2.0 * h);
            worst_d1 = std::max(worst_d1, std::abs(s.d_ell - fd));
            worst_d2 = std::max(worst_d2, std::abs(s.d2_ell + 1.0 / (nu * (2.0 * nu - 1.0))));
          }
          const auto bound = thm1_lower(n, rho, delta, r);
          if (bound.regime != Regime::saturated) {
            worst_val = std::max(worst_val,
                                 std::abs(std::max(0.0, opt.state.ell) - bound.r_c));
          }
        }
      }
    }
  }
  const auto spot = dual_maximize(std::sqrt(0.75), 0.5, 0.1, std::log(7.5));
  o.require(worst_excess <= 1e-8, fmt("l(nu) exceeds l(nu*) by %.3g", worst_excess));
  o.require(worst_d1 <= 1e-6, fmt("first derivative off by %.3g", worst_d1));
  o.require(worst_d2 <= 1e-10, fmt("second derivative off by %.3g", worst_d2));
  o.require(worst_val <= 1e-10, fmt("l(nu*) vs lower bound %.3g", worst_val));
  o.require(std::abs(spot.nu_star - 0.75) < 1e-12, fmt("spot nu* = %.15g", spot.nu_star));
  if (o.pass) {
    o.detail = fmt("d1 err %.2g, d2 err %.2g, value err %.2g", worst_d1, worst_d2, worst_val) +
               fmt(", spot nu* = %.6g", spot.nu_star);
  }
  return o;
}

const std::vector<RandomProfile>& profiles() {
  static const auto p = random_profiles(500, 20261015);
  return p;
}

Outcome criterion4() {
  Outcome o;
  double worst_rate = 0.0, worst_sum = 0.0;
  std::size_t non_monotone = 0;
  for (const auto& rp : profiles()) {
    const ConditionalVarianceProfile p(rp.weights, rp.variances);
    const auto loop = allocate_distortion(p, rp.delta);
    const auto grid = allocation_grid_oracle(p, rp.delta, 1e-3);
    const double excess = std::abs(loop.achieved_rate - grid.rate) - grid.resolution;
    worst_rate = std::max(worst_rate, excess);
    double used = 0.0;
    const auto e = p.entries();
    for (std::size_t i = 0; i < e.size(); ++i) used += e[i].weight * loop.per_letter_delta[i];
    worst_sum = std::max(worst_sum, std::abs(used - rp.delta));
    double prev = 0.0;
    const double top = p.mean_variance();
    for (int k = 1; k <= 50; ++k) {
      const double g = allocate_distortion(p, top * k / 50.0).gamma;
      if (g < prev - 1e-12) ++non_monotone;
      prev = g;
    }
  }
  o.require(worst_rate <= 1e-6, fmt("rate mismatch beyond resolution %.3g", worst_rate));
  o.require(worst_sum <= 1e-10, fmt("distortion sum off by %.3g", worst_sum));
  o.require(non_monotone == 0, fmt("%.0f water-level decreases", non_monotone));
  if (o.pass) {
    o.detail = fmt("500 profiles; max excess over resolution %.2g, sum err %.2g", worst_rate,
                   worst_sum);
  }
  return o;
}

Outcome criterion5() {
  Outcome o;
  std::size_t violations = 0;
  for (const auto& rp : profiles()) {
    const ConditionalVarianceProfile p(rp.weights, rp.variances);
    const auto u = cond_rd_upper(p, rp.delta);
    const double n = p.gaussian_entropy_power();
    const double lower = n > 0.0 ? cond_rd_lower(n, rp.delta) : 0.0;
    if (lower > u.intermediate + 1e-12) ++violations;
    if (u.intermediate > u.bound + 1e-12) ++violations;
  }
  o.require(violations == 0, fmt("%.0f violations", violations));
  if (o.pass) o.detail = "500 profiles, 0 violations";
  return o;
}

Outcome criterion6() {
  Outcome o;
  const double delta = 0.1;
  std::size_t runs = 0;
  for (double rho : {0.3, 0.5, 0.8}) {
    for (double t : {1.0 - rho, 0.5 * (2.0 - rho), 0.95}) {
      MonteCarloOptions mo;
      mo.n_samples = 1'000'000;
      mo.seed = 20261015;
      const auto rep = mc_construction_c(rho, delta, std::log(t / delta), mo);
      ++runs;
      for (const auto& c : rep.checks) {
        o.require(c.verdict == Verdict::pass,
                  fmt("rho %.2g t %.3g: ", rho, t) + c.name + fmt(" = %.8g", c.estimate));
      }
    }
  }
  if (o.pass) o.detail = fmt("%.0f configurations, n = 1e6, all within 4 standard errors", runs);
  return o;
}

Outcome criterion7() {
  Outcome o;
  double worst_corner = 0.0, worst_direct = 0.0, worst_collapse = 0.0;
  std::size_t mc_runs = 0;
  const double delta = 0.1;
  for (double st : {0.1, 0.2}) {
    for (double rho : {0.4, 0.6}) {
      const auto spec = two_point(rho, st);
      const auto src = validate(spec);
      const auto np = pair_entropy_power(src);
      const CornerPoint corner = wyner_corner(np.value, rho, delta);
      const auto at = additive_exact(np.value, rho, st, delta, corner.r_p);
      o.require(at.exact.has_value(), "corner not in the exact region");
      if (at.exact) worst_corner = std::max(worst_corner, std::abs(at.exact->r_c - corner.r_c));
      // Independent value: h(X,Y) on a 2-D grid minus h of the noise pair.
      const double direct = pair_entropy_2d(spec) -
                            (std::log(2.0 * std::numbers::pi * std::numbers::e) +
                             std::log(1.0 - rho));
      worst_direct = std::max(worst_direct, std::abs(direct - corner.r_c));

      MonteCarloOptions mo;
      mo.n_samples = 1'000'000;
      mo.seed = 7;
      for (double u : {0.25, 0.5, 0.75}) {
        const double t = (1.0 - rho) + u * (rho - st);
        const auto rep = mc_construction_d(src, delta, std::log(t / delta), mo);
        ++mc_runs;
        o.require(rep.verdict() == Verdict::pass,
                  fmt("mc_construction_d failed at rho %.2g st %.2g t %.3g", rho, st, t));
      }
    }
  }
  for (double rho : {0.4, 0.6}) {
    const auto np = pair_entropy_power(validate(two_point(rho, 1e-6)));
    for (double r : sweep_grid(delta)) {
      const auto a = additive_exact(np.value, rho, 1e-6, delta, r);
      const double v = a.exact ? a.exact->r_c : a.lower.r_c;
      worst_collapse = std::max(worst_collapse, std::abs(v - gaussian_exact(rho, delta, r).r_c));
    }
  }
  o.require(worst_corner <= 1e-6, fmt("corner off by %.3g", worst_corner));
  o.require(worst_direct <= 1e-6, fmt("corner vs 2-D integral %.3g", worst_direct));
  o.require(worst_collapse <= 1e-4, fmt("collapse off by %.3g", worst_collapse));
  if (o.pass) {
    o.detail = fmt("corner err %.2g, 2-D cross-check %.2g, collapse err %.2g", worst_corner,
                   worst_direct, worst_collapse) +
               fmt(", %.0f MC runs pass", mc_runs);
  }
  return o;
}

Outcome criterion8() {
  Outcome o;
  Philox4x32 rng(88, 0);
  std::size_t equal = 0, collapse = 0;
  double worst = -INFINITY;
  for (int k = 0; k < 50; ++k) {
    const bool is_collapse = k % 10 == 0;
    const double rho = 0.05 + 0.9 * rng.uniform();
    const double st = is_collapse ? 1e-12 : rho * (0.05 + 0.95 * rng.uniform());
    const std::size_t atoms = 2 + static_cast<std::size_t>(rng.uniform() * 4.0);
    std::vector<double> vals(atoms), probs(atoms);
    double total = 0.0;
    for (std::size_t i = 0; i < atoms; ++i) {
      vals[i] = rng.normal();
      probs[i] = 0.1 + rng.uniform();
      total += probs[i];
    }
    double mean = 0.0;
    for (std::size_t i = 0; i < atoms; ++i) {
      probs[i] /= total;
      mean += probs[i] * vals[i];
    }
    double second = 0.0;
    for (std::size_t i = 0; i < atoms; ++i) {
      vals[i] -= mean;
      second += probs[i] * vals[i] * vals[i];
    }
    AdditiveChannelSpec s{rho, 0.0, {}, 1.0};
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < atoms; ++i) {
      s.theta_law.push_back({vals[i] * std::sqrt(st / second), probs[i]});
      m1 += probs[i] * s.theta_law.back().value;
      m2 += probs[i] * s.theta_law.back().value * s.theta_law.back().value;
    }
    s.sigma_theta2 = m2 - m1 * m1;
    const double n = pair_entropy_power(validate(s)).value;
    const double g = std::sqrt(1.0 - rho * rho);
    worst = std::max(worst, n - g);
    const bool eq = std::abs(n - g) <= 1e-9;
    equal += eq;
    collapse += is_collapse;
    o.require(n <= g + 1e-6, fmt("N = %.10g above %.10g", n, g));
    o.require(eq == is_collapse, fmt("equality mismatch at rho %.3g st %.3g", rho, st));
  }
  if (o.pass) {
    o.detail = fmt("50 sources, max N - sqrt(1-rho^2) = %.2g; equality in %.0f of %.0f collapse "
                   "cases only",
                   worst, equal, collapse);
  }
  return o;
}

Outcome criterion9() {
  Outcome o;
  const double rho = 0.5, delta = 0.2;
  const auto inst = quantize_gaussian_pair(rho, 8, delta);
  FrontierOptions fo;
  fo.seed = 1;
  fo.restarts = 32;
  fo.alphabet = 4;
  fo.jobs = std::max(1u, std::thread::hardware_concurrency());
  std::string points;
  bool saw_low = false, saw_high = false;
  for (double t : {0.4, 0.45, 0.6, 0.75, 0.9}) {
    const double r_p = std::log(t / delta);
    const auto rep = gw_frontier_estimate(inst, delta, r_p, fo);
    const auto* c = rep.find("gaussian_exact_bracket");
    const double exact = gaussian_exact(rho, delta, r_p).r_c;
    const Regime regime = classify_regime(rho, t);
    saw_low |= regime == Regime::low;
    saw_high |= regime == Regime::high;
    o.require(c != nullptr && c->verdict == Verdict::pass && rep.verdict() == Verdict::pass,
              fmt("t %.3g: estimate %.5f vs exact %.5f", t, c ? c->estimate : NAN, exact));
    points += fmt(" %+.4f", c ? c->estimate - exact : NAN);
  }
  o.require(saw_low && saw_high, "points do not span both regimes");
  if (o.pass) o.detail = "estimate - exact at 5 points:" + points;
  return o;
}

struct Cmd {
  int code = -1;
  std::string out;
};

Cmd gwb(const std::string& args) {
  const std::string cmd = std::string(GWB_BINARY) + " " + args + " 2>/dev/null";
  Cmd r;
  FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion10() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "gwb_acceptance";
  fs::create_directories(dir);
  const std::string samples = GWB_SAMPLES_DIR;
  for (const char* cfg : {"gaussian.json", "additive.json", "discrete.json"}) {
    const auto a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
    const std::string config = samples + "/" + cfg;
    o.require(gwb("curve --config " + config + " --csv " + a).code == 0, "curve failed");
    o.require(gwb("curve --config " + config + " --reeval " + a + " --csv " + b).code == 0,
              "reeval failed");
    o.require(slurp(a) == slurp(b) && !slurp(a).empty(),
              std::string("round trip differs for ") + cfg);
  }

  const auto nats = (dir / "n.csv").string(), bits = (dir / "b.csv").string();
  const std::string g = samples + "/gaussian.json";
  gwb("curve --config " + g + " --csv " + nats);
  gwb("curve --config " + g + " --bits --csv " + bits);
  std::ifstream ni(nats), bi(bits);
  const auto pn = read_curve_csv(ni), pb = read_curve_csv(bi);
  double worst = 0.0;
  for (std::size_t i = 0; i < pn.rows.size(); ++i) {
    for (auto [x, y] : {std::pair{pn.rows[i].r_p, pb.rows[i].r_p},
                        std::pair{pn.rows[i].r_c_upper, pb.rows[i].r_c_upper},
                        std::pair{pn.rows[i].r_c_lower, pb.rows[i].r_c_lower}}) {
      worst = std::max(worst, std::abs(x / std::numbers::ln2 - y) / std::max(1.0, std::abs(y)));
    }
    o.require(pn.rows[i].regime == pb.rows[i].regime, "regime changed under --bits");
  }
  o.require(pb.unit == RateUnit::bits && pn.rows.size() == pb.rows.size(), "bits CSV malformed");
  o.require(worst <= 1e-11, fmt("bits conversion off by %.3g", worst));

  const std::vector<std::pair<std::string, int>> codes = {
      {"curve --config " + g, 0},
      {"point --config " + g + " --r-p 1.0", 0},
      {"bogus", 1},
      {"point --config " + g, 1},
      {"entropy --config " + samples + "/discrete.json", 1},
      {"curve --config /nonexistent/x.json", 3},
      {"curve --config " + g + " --csv /nonexistent/dir/x.csv", 3},
      {"verify --config " + g + " --oracle frontier --seed 1 --restarts 1 --alphabet 1 "
       "--levels 4 --delta 0.2 --r-p 0.5", 2},
  };
  std::size_t ok = 0;
  for (const auto& [args, want] : codes) {
    const int got = gwb(args + (want == 0 && args.starts_with("curve") ? " --csv -" : "")).code;
    o.require(got == want, "gwb " + args + fmt(": exit %.0f, want %.0f", got, want));
    ok += got == want;
  }
  fs::remove_all(dir);
  if (o.pass) {
    o.detail = fmt("3 CSV round trips identical, bits err %.2g, %.0f exit codes as mapped", worst,
                   ok);
  }
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all = {
      {1, "gaussian coincidence", 1.0, criterion1},
      {2, "regime continuity and shape", 0.0, criterion2},
      {3, "dual machinery", 0.0, criterion3},
      {4, "allocation vs grid oracle", 30.0, criterion4},
      {5, "conditional upper-bound chain", 0.0, criterion5},
      {6, "construction C Monte-Carlo", 60.0, criterion6},
      {7, "additive sources and corner point", 0.0, criterion7},
      {8, "pair entropy power below Gaussian", 0.0, criterion8},
      {9, "frontier oracle bracket", 600.0, criterion9},
      {10, "CLI contract", 0.0, criterion10},
  };
  int failures = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0.0 && secs > c.budget_s) {
      o.pass = false;
      o.detail += fmt(" (over the %.0f s budget)", c.budget_s);
    }
    failures += !o.pass;
    std::printf("criterion %2d %-36s %s  %.2fs  %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL",
                secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failures, all.size());
  return failures == 0 ? 0 : 1;
}
