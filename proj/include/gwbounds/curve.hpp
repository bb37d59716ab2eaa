#pragma once

// R_p sweeps of the bounds and their CSV form.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "gwbounds/config.hpp"
#include "gwbounds/error.hpp"
#include "gwbounds/gw_bounds.hpp"
#include "gwbounds/oracle/parallel.hpp"
#include "gwbounds/source_models.hpp"

namespace gwbounds {

enum class RateUnit { nats, bits };

inline const char* to_string(RateUnit u) { return u == RateUnit::nats ? "nats" : "bits"; }

inline double to_unit(double nats, RateUnit u) {
  return u == RateUnit::nats ? nats : nats / std::numbers::ln2;
}

/// 12 significant digits, the CSV number format.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// v rounded to the value its 12-digit form reads back as.
inline double round_printed(double v) { return std::strtod(format_number(v).c_str(), nullptr); }

struct CurveRow {
  double r_p = 0.0;
  double r_c_lower = 0.0;
  double r_c_upper = 0.0;
  std::optional<double> r_c_exact;
  Regime regime = Regime::saturated;
  /// "exact" where the region is known exactly, otherwise "bounds_only".
  std::string kind_flags;
};

/// Source data needed per row. The pair entropy power is absent for discrete
/// sources, whose lower bound degenerates to zero.
struct CurveSource {
  SourceKind kind = SourceKind::gaussian;
  double rho = 0.0;
  double sigma_theta2 = 0.0;
  std::optional<double> n_pair;
};

inline CurveSource curve_source(const ValidatedSource& source) {
  CurveSource c;
  c.kind = source.kind();
  c.rho = source.rho();
  c.sigma_theta2 = source.sigma_theta2();
  if (c.kind != SourceKind::discrete) c.n_pair = pair_entropy_power(source).value;
  return c;
}

/// One row at normalized distortion delta.
inline CurveRow evaluate_row(const CurveSource& src, double delta, double r_p) {
  CurveRow row;
  row.r_p = r_p;
  const RateRegionPoint upper = thm1_upper(src.rho, delta, r_p);
  row.r_c_upper = upper.r_c;
  row.regime = upper.regime;
  switch (src.kind) {
    case SourceKind::gaussian: {
      row.r_c_lower = thm1_lower(*src.n_pair, src.rho, delta, r_p).r_c;
      row.r_c_exact = gaussian_exact(src.rho, delta, r_p).r_c;
      break;
    }
    case SourceKind::additive_channel: {
      const AdditiveResult a =
          additive_exact(*src.n_pair, src.rho, src.sigma_theta2, delta, r_p);
      row.r_c_lower = a.lower.r_c;
      if (a.exact) row.r_c_exact = a.exact->r_c;
      break;
    }
    case SourceKind::discrete:
      row.r_c_lower = 0.0;
      break;
  }
  row.kind_flags = row.r_c_exact ? "exact" : "bounds_only";
  return row;
}

/// Grid points, each rounded to its printed 12-digit value so that a CSV
/// re-read evaluates at exactly the same R_p.
inline std::vector<double> grid_points(const RpGrid& g) {
  std::vector<double> pts(g.count);
  const double n = static_cast<double>(g.count - 1);
  for (std::size_t i = 0; i < g.count; ++i) {
    const double u = static_cast<double>(i) / n;
    double v;
    if (i == 0) {
      v = g.min;
    } else if (i + 1 == g.count) {
      v = g.max;
    } else if (g.spacing == Spacing::linear) {
      v = g.min + (g.max - g.min) * u;
    } else {
      v = std::exp(std::log(g.min) + (std::log(g.max) - std::log(g.min)) * u);
    }
    pts[i] = round_printed(v);
  }
  return pts;
}

/// Rows for the given R_p values (ascending order is the caller's job),
/// evaluated on up to `jobs` threads.
inline std::vector<CurveRow> sweep(const CurveSource& src, double delta,
                                   const std::vector<double>& r_p, std::size_t jobs = 1) {
  std::vector<CurveRow> rows(r_p.size());
  oracle::parallel_for(r_p.size(), jobs,
                       [&](std::size_t i) { rows[i] = evaluate_row(src, delta, r_p[i]); });
  return rows;
}

struct CurveHeader {
  RateUnit unit = RateUnit::nats;
  std::string source_kind;
  double rho = 0.0;
  double delta = 0.0;
};

inline const std::vector<std::string>& curve_columns() {
  static const std::vector<std::string> cols = {
      "r_p_nats", "r_c_lower_nats", "r_c_upper_nats", "r_c_exact_nats", "regime",
      "kind_flags"};
  return cols;
}

/// Column names for a unit: the *_nats suffix becomes *_bits under bits.
inline std::vector<std::string> column_names(RateUnit u) {
  auto cols = curve_columns();
  if (u == RateUnit::bits) {
    for (auto& c : cols) {
      if (c.ends_with("_nats")) c.replace(c.size() - 4, 4, "bits");
    }
  }
  return cols;
}

inline void write_curve_csv(std::ostream& out, const CurveHeader& h,
                            const std::vector<CurveRow>& rows) {
  out << "# unit=" << to_string(h.unit) << " source=" << h.source_kind
      << " rho=" << format_number(h.rho) << " delta_normalized=" << format_number(h.delta)
      << "\n";
  const auto cols = column_names(h.unit);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (const auto& r : rows) {
    out << format_number(to_unit(r.r_p, h.unit)) << ','
        << format_number(to_unit(r.r_c_lower, h.unit)) << ','
        << format_number(to_unit(r.r_c_upper, h.unit)) << ',';
    if (r.r_c_exact) out << format_number(to_unit(*r.r_c_exact, h.unit));
    out << ',' << to_string(r.regime) << ',' << r.kind_flags << "\n";
  }
}

struct ParsedCurve {
  RateUnit unit = RateUnit::nats;
  std::vector<CurveRow> rows;
};

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_cell(const std::string& s, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') {
    throw Error(ErrorKind::BadConfig,
                "CSV line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

inline Regime parse_regime(const std::string& s, std::size_t line) {
  if (s == "high") return Regime::high;
  if (s == "low") return Regime::low;
  if (s == "saturated") return Regime::saturated;
  throw Error(ErrorKind::BadConfig,
              "CSV line " + std::to_string(line) + ": bad regime '" + s + "'");
}

}  // namespace detail

/// Reads a CSV written by write_curve_csv. Values stay in the file's unit.
inline ParsedCurve read_curve_csv(std::istream& in) {
  ParsedCurve out;
  std::string line;
  std::size_t n = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line[0] == '#') continue;
    const auto cells = detail::split_csv(line);
    if (!header) {
      if (cells == column_names(RateUnit::nats)) {
        out.unit = RateUnit::nats;
      } else if (cells == column_names(RateUnit::bits)) {
        out.unit = RateUnit::bits;
      } else {
        throw Error(ErrorKind::BadConfig, "CSV line " + std::to_string(n) + ": unexpected header");
      }
      header = true;
      continue;
    }
    if (cells.size() != 6) {
      throw Error(ErrorKind::BadConfig, "CSV line " + std::to_string(n) + ": expected 6 cells");
    }
    CurveRow r;
    r.r_p = detail::parse_cell(cells[0], n);
    r.r_c_lower = detail::parse_cell(cells[1], n);
    r.r_c_upper = detail::parse_cell(cells[2], n);
    if (!cells[3].empty()) r.r_c_exact = detail::parse_cell(cells[3], n);
    r.regime = detail::parse_regime(cells[4], n);
    r.kind_flags = cells[5];
    out.rows.push_back(r);
  }
  if (!header) throw Error(ErrorKind::BadConfig, "CSV has no header row");
  return out;
}

}  // namespace gwbounds
