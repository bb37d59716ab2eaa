#pragma once

// JSON sweep configuration: a source description plus the sweep, output and oracle
// settings used by the command-line tool.

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gwbounds/error.hpp"
#include "gwbounds/source_models.hpp"

namespace gwbounds {

enum class Spacing { linear, log };

struct RpGrid {
  double min = 0.0;
  double max = 1.0;
  std::size_t count = 2;
  Spacing spacing = Spacing::linear;
};

struct OutputPaths {
  std::optional<std::string> csv_path;
  std::optional<std::string> report_path;
};

struct OracleConfig {
  std::string kind;
  std::optional<std::size_t> n_samples;
  std::optional<std::size_t> restarts;
  std::optional<std::uint64_t> seed;
};

struct SweepConfig {
  SourceSpec source;
  /// Distortion in source units.
  std::optional<double> delta;
  std::optional<RpGrid> r_p_grid;
  OutputPaths outputs;
  std::optional<OracleConfig> oracle;
};

/// Raised when a config file cannot be read at all.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

using nlohmann::json;

[[noreturn]] inline void config_error(const std::string& key, const std::string& what) {
  throw Error(ErrorKind::BadConfig, "config key '" + key + "': " + what);
}

inline const json& require(const json& node, const std::string& key,
                           const std::string& path) {
  auto it = node.find(key);
  if (it == node.end()) config_error(path + key, "missing");
  return *it;
}

inline double number(const json& node, const std::string& path) {
  if (!node.is_number()) config_error(path, "expected a number");
  return node.get<double>();
}

inline std::vector<double> number_list(const json& node, const std::string& path) {
  if (!node.is_array()) config_error(path, "expected a list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < node.size(); ++i) {
    out.push_back(number(node[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

inline std::uint64_t unsigned_integer(const json& node, const std::string& path) {
  if (!node.is_number_unsigned()) config_error(path, "expected a non-negative integer");
  return node.get<std::uint64_t>();
}

/// Row-major pmf given either flat or as a list of rows.
inline std::vector<double> pmf_matrix(const json& node, std::size_t rows,
                                      std::size_t cols) {
  if (!node.is_array()) config_error("pmf", "expected a matrix");
  std::vector<double> out;
  if (!node.empty() && node[0].is_array()) {
    if (node.size() != rows) config_error("pmf", "row count must match x_support");
    for (std::size_t i = 0; i < rows; ++i) {
      const auto row = number_list(node[i], "pmf[" + std::to_string(i) + "]");
      if (row.size() != cols) {
        config_error("pmf[" + std::to_string(i) + "]", "row length must match y_support");
      }
      out.insert(out.end(), row.begin(), row.end());
    }
  } else {
    out = number_list(node, "pmf");
    if (out.size() != rows * cols) {
      config_error("pmf", "needs |x_support| * |y_support| entries");
    }
  }
  return out;
}

inline SourceSpec parse_source(const json& root) {
  const json& kind = require(root, "kind", "");
  if (!kind.is_string()) config_error("kind", "expected a string");
  const std::string k = kind.get<std::string>();
  double sigma2 = 1.0;
  if (root.contains("sigma2")) sigma2 = number(root["sigma2"], "sigma2");
  if (k == "gaussian") {
    return GaussianPairSpec{number(require(root, "rho", ""), "rho"), sigma2};
  }
  if (k == "additive_channel") {
    AdditiveChannelSpec a;
    a.rho = number(require(root, "rho", ""), "rho");
    a.sigma_theta2 = number(require(root, "sigma_theta2", ""), "sigma_theta2");
    a.sigma2 = sigma2;
    const json& law = require(root, "theta_law", "");
    if (!law.is_array()) config_error("theta_law", "expected a list of [value, prob]");
    for (std::size_t i = 0; i < law.size(); ++i) {
      const std::string p = "theta_law[" + std::to_string(i) + "]";
      if (!law[i].is_array() || law[i].size() != 2) config_error(p, "expected [value, prob]");
      a.theta_law.push_back({number(law[i][0], p + "[0]"), number(law[i][1], p + "[1]")});
    }
    return a;
  }
  if (k == "discrete") {
    DiscreteJointSpec d;
    d.x_support = number_list(require(root, "x_support", ""), "x_support");
    d.y_support = number_list(require(root, "y_support", ""), "y_support");
    d.pmf = pmf_matrix(require(root, "pmf", ""), d.x_support.size(), d.y_support.size());
    return d;
  }
  config_error("kind", "must be one of gaussian, additive_channel, discrete");
}

inline RpGrid parse_grid(const json& g) {
  if (!g.is_object()) config_error("r_p_grid", "expected an object");
  RpGrid out;
  out.min = number(require(g, "min", "r_p_grid."), "r_p_grid.min");
  out.max = number(require(g, "max", "r_p_grid."), "r_p_grid.max");
  out.count = unsigned_integer(require(g, "count", "r_p_grid."), "r_p_grid.count");
  if (g.contains("spacing")) {
    const json& s = g["spacing"];
    if (s == "linear") {
      out.spacing = Spacing::linear;
    } else if (s == "log") {
      out.spacing = Spacing::log;
    } else {
      config_error("r_p_grid.spacing", "must be linear or log");
    }
  }
  if (out.count < 2) config_error("r_p_grid.count", "must be at least 2");
  if (!(out.min >= 0.0)) config_error("r_p_grid.min", "must be >= 0");
  if (!(out.max > out.min)) config_error("r_p_grid.max", "must exceed min");
  if (out.spacing == Spacing::log && !(out.min > 0.0)) {
    config_error("r_p_grid.min", "log spacing needs min > 0");
  }
  return out;
}

inline OracleConfig parse_oracle(const json& o) {
  if (!o.is_object()) config_error("oracle", "expected an object");
  OracleConfig out;
  const json& kind = require(o, "kind", "oracle.");
  if (!kind.is_string()) config_error("oracle.kind", "expected a string");
  out.kind = kind.get<std::string>();
  if (o.contains("n_samples")) out.n_samples = unsigned_integer(o["n_samples"], "oracle.n_samples");
  if (o.contains("restarts")) out.restarts = unsigned_integer(o["restarts"], "oracle.restarts");
  if (o.contains("seed")) out.seed = unsigned_integer(o["seed"], "oracle.seed");
  return out;
}

inline std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace detail

inline SweepConfig parse_config(const nlohmann::json& root) {
  if (!root.is_object()) detail::config_error("<root>", "expected an object");
  SweepConfig cfg;
  cfg.source = detail::parse_source(root);
  if (root.contains("delta")) cfg.delta = detail::number(root["delta"], "delta");
  if (root.contains("r_p_grid")) cfg.r_p_grid = detail::parse_grid(root["r_p_grid"]);
  if (root.contains("outputs")) {
    const auto& o = root["outputs"];
    if (!o.is_object()) detail::config_error("outputs", "expected an object");
    for (const char* key : {"csv_path", "report_path"}) {
      if (!o.contains(key)) continue;
      if (!o[key].is_string()) {
        detail::config_error(std::string("outputs.") + key, "expected a string");
      }
      (std::string(key) == "csv_path" ? cfg.outputs.csv_path : cfg.outputs.report_path) =
          o[key].get<std::string>();
    }
  }
  if (root.contains("oracle")) cfg.oracle = detail::parse_oracle(root["oracle"]);
  return cfg;
}

/// Parses a config document; syntax errors report line and column.
inline SweepConfig parse_config_text(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::BadConfig,
                "config syntax error at " + detail::line_column(text, e.byte) + ": " +
                    e.what());
  }
  return parse_config(root);
}

inline SweepConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace gwbounds
