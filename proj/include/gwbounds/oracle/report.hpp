#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace gwbounds::oracle {

enum class Verdict { pass, fail, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

/// One estimate compared against a closed-form bracket.
/// verdict = pass iff lower - tolerance <= estimate <= upper + tolerance.
struct OracleCheck {
  std::string name;
  double estimate = 0.0;
  double closed_form_lower = 0.0;
  double closed_form_upper = 0.0;
  double tolerance = 0.0;
  std::optional<double> mc_stderr;
  Verdict verdict = Verdict::inconclusive;

  static OracleCheck make(std::string name, double estimate, double lower,
                          double upper, double tolerance,
                          std::optional<double> stderr_ = std::nullopt) {
    OracleCheck c{std::move(name), estimate, lower, upper, tolerance, stderr_,
                  Verdict::inconclusive};
    if (std::isfinite(estimate) && std::isfinite(tolerance)) {
      c.verdict = (lower - tolerance <= estimate && estimate <= upper + tolerance)
                      ? Verdict::pass
                      : Verdict::fail;
    }
    return c;
  }
};

struct OracleReport {
  std::string oracle;
  nlohmann::json inputs = nlohmann::json::object();
  std::vector<OracleCheck> checks;
  nlohmann::json details = nlohmann::json::object();

  /// fail if any check fails, else inconclusive if any is, else pass.
  Verdict verdict() const {
    bool inconclusive = checks.empty();
    for (const auto& c : checks) {
      if (c.verdict == Verdict::fail) return Verdict::fail;
      if (c.verdict == Verdict::inconclusive) inconclusive = true;
    }
    return inconclusive ? Verdict::inconclusive : Verdict::pass;
  }

  const OracleCheck* find(const std::string& name) const {
    for (const auto& c : checks) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
};

inline nlohmann::json to_json(const OracleCheck& c) {
  nlohmann::json j;
  j["name"] = c.name;
  j["estimate"] = c.estimate;
  j["closed_form_lower"] = c.closed_form_lower;
  j["closed_form_upper"] = c.closed_form_upper;
  j["tolerance"] = c.tolerance;
  j["mc_stderr"] = c.mc_stderr ? nlohmann::json(*c.mc_stderr) : nlohmann::json();
  j["verdict"] = to_string(c.verdict);
  return j;
}

inline nlohmann::json to_json(const OracleReport& r) {
  nlohmann::json j;
  j["oracle"] = r.oracle;
  j["inputs"] = r.inputs;
  j["checks"] = nlohmann::json::array();
  for (const auto& c : r.checks) j["checks"].push_back(to_json(c));
  j["details"] = r.details;
  j["verdict"] = to_string(r.verdict());
  return j;
}

}  // namespace gwbounds::oracle
