// gwb: common-rate / private-rate bound curves, oracles and helpers.
//
// Exit status: 0 ok, 1 validation error, 2 oracle failure, 3 I/O error.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gwbounds/gwbounds.hpp"

namespace {

using nlohmann::json;
using namespace gwbounds;

enum Exit { kOk = 0, kValidation = 1, kOracleFail = 2, kIo = 3 };

struct Common {
  std::string config;
  std::optional<double> delta;
  bool bits = false;
  std::size_t jobs = 1;
  std::string report;
};

struct Loaded {
  SweepConfig cfg;
  ValidatedSource source;
  /// Normalized distortion, when one was given.
  std::optional<double> delta;
};

Loaded load(const Common& c) {
  if (c.config.empty()) throw Error(ErrorKind::BadConfig, "--config is required");
  SweepConfig cfg = load_config(c.config);
  ValidatedSource src = validate(cfg.source);
  std::optional<double> raw = c.delta ? c.delta : cfg.delta;
  std::optional<double> delta;
  if (raw) delta = src.normalize_distortion(*raw);
  return {std::move(cfg), std::move(src), delta};
}

double require_delta(const Loaded& l) {
  if (!l.delta) throw Error(ErrorKind::BadConfig, "no delta: set it in the config or pass --delta");
  return *l.delta;
}

double rate(double nats, bool bits) { return bits ? nats / std::numbers::ln2 : nats; }

void emit_text(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

void emit_json(const json& j, const std::string& path) { emit_text(j.dump(2) + "\n", path); }

std::string source_name(const ValidatedSource& s) { return to_string(s.kind()); }

// ---------------------------------------------------------------------------

int cmd_curve(const Common& c, std::string csv, const std::string& reeval) {
  const Loaded l = load(c);
  const double delta = require_delta(l);
  if (csv.empty() && l.cfg.outputs.csv_path) csv = *l.cfg.outputs.csv_path;
  const CurveSource src = curve_source(l.source);
  const CurveHeader header{c.bits ? RateUnit::bits : RateUnit::nats, source_name(l.source),
                           l.source.rho(), delta};

  std::vector<double> r_p;
  if (!reeval.empty()) {
    std::ifstream in(reeval);
    if (!in) throw IoError("cannot open '" + reeval + "'");
    const ParsedCurve parsed = read_curve_csv(in);
    if (parsed.unit != RateUnit::nats) {
      throw Error(ErrorKind::BadConfig, "re-evaluation needs a CSV written in nats");
    }
    for (const auto& row : parsed.rows) r_p.push_back(row.r_p);
  } else {
    if (!l.cfg.r_p_grid) throw Error(ErrorKind::BadConfig, "config key 'r_p_grid': missing");
    r_p = grid_points(*l.cfg.r_p_grid);
  }
  const auto rows = sweep(src, delta, r_p, c.jobs);
  std::ostringstream out;
  write_curve_csv(out, header, rows);
  emit_text(out.str(), csv);
  return kOk;
}

int cmd_point(const Common& c, double r_p) {
  const Loaded l = load(c);
  const double delta = require_delta(l);
  const CurveSource src = curve_source(l.source);
  const CurveRow row = evaluate_row(src, delta, r_p);
  const bool b = c.bits;

  json j;
  j["unit"] = b ? "bits" : "nats";
  j["source"] = source_name(l.source);
  j["rho"] = l.source.rho();
  j["sigma2"] = l.source.sigma2();
  j["delta_normalized"] = delta;
  j["r_p"] = rate(r_p, b);
  j["scaled_distortion"] = scaled_distortion(delta, r_p);
  j["regime"] = to_string(row.regime);
  j["kind_flags"] = row.kind_flags;
  j["r_c_lower"] = rate(row.r_c_lower, b);
  j["r_c_upper"] = rate(row.r_c_upper, b);
  j["r_c_exact"] = row.r_c_exact ? json(rate(*row.r_c_exact, b)) : json();
  if (src.n_pair) {
    const double n = *src.n_pair;
    const DualOptimum d = dual_maximize(n, src.rho, delta, r_p);
    j["pair_entropy_power"] = n;
    j["nu_star"] = d.nu_star;
    j["nu_clamp"] = to_string(d.clamp);
    j["dual_value"] = rate(d.point.r_c, b);
    const CornerPoint corner = wyner_corner(n, src.rho, delta);
    j["wyner_ci"] = rate(wyner_ci(n, src.rho), b);
    j["corner"] = {{"r_c", rate(corner.r_c, b)}, {"r_p", rate(corner.r_p, b)}};
    j["corner_distance"] = {{"d_r_p", rate(r_p - corner.r_p, b)},
                            {"d_r_c_lower", rate(row.r_c_lower - corner.r_c, b)}};
  } else {
    j["pair_entropy_power"] = json();
    j["wyner_ci"] = json();
  }
  emit_json(j, c.report);
  return kOk;
}

struct VerifyOptions {
  std::string oracle;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<std::size_t> restarts;
  std::optional<double> r_p;
  std::vector<double> weights;
  std::vector<double> variances;
  double step = 1e-3;
  std::size_t levels = 8;
  std::size_t alphabet = 4;
};

oracle::OracleReport run_allocation_grid(const VerifyOptions& v, double delta) {
  const ConditionalVarianceProfile profile(v.weights, v.variances);
  const AllocationResult loop = allocate_distortion(profile, delta);
  const auto grid = oracle::allocation_grid_oracle(profile, delta, v.step);
  oracle::OracleReport r;
  r.oracle = "allocation_grid";
  r.inputs = {{"weights", v.weights}, {"variances", v.variances}, {"delta", delta},
              {"step", v.step}};
  r.details = {{"gamma", loop.gamma},
               {"clamp_count", loop.clamp_count},
               {"grid_evaluations", grid.evaluations},
               {"grid_resolution", grid.resolution}};
  r.checks.push_back(oracle::OracleCheck::make("achieved_rate", loop.achieved_rate,
                                               grid.rate, grid.rate,
                                               1e-6 + grid.resolution));
  return r;
}

int cmd_verify(const Common& c, VerifyOptions v) {
  std::string kind = v.oracle;
  std::optional<std::uint64_t> seed = v.seed;
  std::optional<std::size_t> samples = v.samples, restarts = v.restarts;

  if (kind == "allocation_grid" && c.config.empty()) {
    if (!c.delta) throw Error(ErrorKind::BadConfig, "allocation_grid needs --delta");
    const auto r = run_allocation_grid(v, *c.delta);
    emit_json(oracle::to_json(r), c.report);
    return r.verdict() == oracle::Verdict::fail ? kOracleFail : kOk;
  }

  const Loaded l = load(c);
  if (l.cfg.oracle) {
    if (kind.empty()) kind = l.cfg.oracle->kind;
    if (!seed) seed = l.cfg.oracle->seed;
    if (!samples) samples = l.cfg.oracle->n_samples;
    if (!restarts) restarts = l.cfg.oracle->restarts;
  }
  if (kind.empty()) throw Error(ErrorKind::BadConfig, "no oracle: pass --oracle or set oracle.kind");
  const double delta = require_delta(l);

  oracle::OracleReport report;
  if (kind == "allocation_grid") {
    report = run_allocation_grid(v, delta);
  } else {
    if (!v.r_p) throw Error(ErrorKind::BadConfig, "--r-p is required for this oracle");
    if (kind == "mc_construction_c" || kind == "mc_construction_d") {
      oracle::MonteCarloOptions mo;
      mo.seed = seed;
      mo.jobs = c.jobs;
      if (samples) mo.n_samples = *samples;
      if (kind == "mc_construction_c") {
        if (l.source.kind() != SourceKind::gaussian) {
          throw Error(ErrorKind::BadConfig, "mc_construction_c needs a gaussian source");
        }
        report = oracle::mc_construction_c(l.source.rho(), delta, *v.r_p, mo);
      } else {
        report = oracle::mc_construction_d(l.source, delta, *v.r_p, mo);
      }
    } else if (kind == "frontier") {
      if (l.source.kind() != SourceKind::gaussian) {
        throw Error(ErrorKind::BadConfig, "frontier runs on a quantized gaussian source");
      }
      const auto inst = oracle::quantize_gaussian_pair(l.source.rho(), v.levels, delta);
      oracle::FrontierOptions fo;
      fo.seed = seed;
      fo.jobs = c.jobs;
      fo.alphabet = v.alphabet;
      if (restarts) fo.restarts = *restarts;
      report = oracle::gw_frontier_estimate(inst, delta, *v.r_p, fo);
    } else {
      throw Error(ErrorKind::BadConfig,
                  "unknown oracle '" + kind +
                      "' (mc_construction_c, mc_construction_d, allocation_grid, frontier)");
    }
  }
  emit_json(oracle::to_json(report), c.report);
  return report.verdict() == oracle::Verdict::fail ? kOracleFail : kOk;
}

int cmd_alloc(const Common& c, const std::vector<double>& weights,
              const std::vector<double>& variances) {
  if (!c.delta) throw Error(ErrorKind::BadConfig, "alloc needs --delta");
  const ConditionalVarianceProfile profile(weights, variances);
  const ConditionalUpperBound ub = cond_rd_upper(profile, *c.delta);
  const AllocationResult& a = ub.allocation;
  json letters = json::array();
  const auto entries = profile.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    letters.push_back({{"index", entries[i].index},
                       {"weight", entries[i].weight},
                       {"variance", entries[i].variance},
                       {"delta", a.per_letter_delta[i]}});
  }
  json j;
  j["unit"] = c.bits ? "bits" : "nats";
  j["delta"] = *c.delta;
  j["gamma"] = a.gamma;
  j["clamp_count"] = a.clamp_count;
  j["letters"] = letters;
  j["achieved_rate"] = rate(a.achieved_rate, c.bits);
  j["cond_rd_upper"] = rate(ub.bound, c.bits);
  j["surplus"] = a.surplus;
  j["surplus_amount"] = a.surplus_amount;
  emit_json(j, c.report);
  return kOk;
}

int cmd_entropy(const Common& c) {
  const Loaded l = load(c);
  auto entry = [&](const EntropyPowerValue& v) {
    return json{{"value", v.value},
                {"entropy", rate(v.entropy, c.bits)},
                {"method", to_string(v.method)},
                {"est_error", v.est_error}};
  };
  json j;
  j["unit"] = c.bits ? "bits" : "nats";
  j["source"] = source_name(l.source);
  j["rho"] = l.source.rho();
  j["pair"] = entry(pair_entropy_power(l.source));
  j["marginal"] = entry(marginal_entropy_power(l.source));
  j["conditional"] = entry(conditional_entropy_power(l.source));
  j["gaussian_reference"] = std::sqrt(1.0 - l.source.rho() * l.source.rho());
  emit_json(j, c.report);
  return kOk;
}

int exit_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::QuadratureNotConverged:
    case ErrorKind::NotConverged:
    case ErrorKind::NoFeasiblePointFound:
      return kOracleFail;
    default:
      return kValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Common-rate / private-rate bound curves and oracles"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub, bool config) {
    if (config) sub->add_option("--config", common.config, "JSON source/sweep config");
    sub->add_option("--delta", common.delta, "distortion in source units (overrides config)");
    sub->add_flag("--bits", common.bits, "print rates in bits (computation stays in nats)");
    sub->add_option("--jobs", common.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--report", common.report, "output path for the JSON report (default stdout)");
  };

  std::string csv, reeval;
  auto* curve = app.add_subcommand("curve", "sweep R_p and write the bound curves as CSV");
  add_common(curve, true);
  curve->add_option("--csv", csv, "CSV output path (default outputs.csv_path, else stdout)");
  curve->add_option("--reeval", reeval, "re-evaluate the R_p column of an existing CSV");

  double point_rp = 0.0;
  auto* point = app.add_subcommand("point", "evaluate the bounds at one R_p");
  add_common(point, true);
  point->add_option("--r-p", point_rp, "private sum-rate in nats")->required();

  VerifyOptions vo;
  auto* verify = app.add_subcommand("verify", "run an oracle and report verdicts");
  add_common(verify, true);
  verify->add_option("--oracle", vo.oracle,
                     "mc_construction_c | mc_construction_d | allocation_grid | frontier");
  verify->add_option("--seed", vo.seed, "RNG seed (required by randomized oracles)");
  verify->add_option("--samples", vo.samples, "Monte-Carlo sample count");
  verify->add_option("--restarts", vo.restarts, "frontier restarts");
  verify->add_option("--r-p", vo.r_p, "private sum-rate in nats");
  verify->add_option("--weights", vo.weights, "allocation_grid letter weights");
  verify->add_option("--variances", vo.variances, "allocation_grid letter variances");
  verify->add_option("--step", vo.step, "allocation_grid lattice step");
  verify->add_option("--levels", vo.levels, "frontier quantizer levels per axis");
  verify->add_option("--alphabet", vo.alphabet, "frontier |W|");

  std::vector<double> weights, variances;
  auto* alloc = app.add_subcommand("alloc", "distortion allocation over a variance profile");
  add_common(alloc, false);
  alloc->add_option("--weights", weights, "letter weights p(w)")->required();
  alloc->add_option("--variances", variances, "letter variances Var(X|W=w)")->required();

  auto* entropy = app.add_subcommand("entropy", "entropy powers of a continuous source");
  add_common(entropy, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*curve) return cmd_curve(common, csv, reeval);
    if (*point) return cmd_point(common, point_rp);
    if (*verify) return cmd_verify(common, vo);
    if (*alloc) return cmd_alloc(common, weights, variances);
    if (*entropy) return cmd_entropy(common);
  } catch (const IoError& e) {
    std::cerr << "gwb: " << e.what() << "\n";
    return kIo;
  } catch (const Error& e) {
    std::cerr << "gwb: " << e.what() << "\n";
    return exit_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "gwb: internal error: " << e.what() << "\n";
    return kOracleFail;
  }
  return kValidation;
}
