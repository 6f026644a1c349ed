#ifndef BIOT_REPORT_HPP
#define BIOT_REPORT_HPP

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "verify.hpp"

namespace biot::report {

/// A table cell: a number, a string, or empty.
struct Cell {
  enum class Kind { number, text, empty } kind = Kind::empty;
  double number = 0.0;
  std::string text;

  Cell() = default;
  Cell(double v) : kind(std::isfinite(v) ? Kind::number : Kind::empty), number(v) {}  // NOLINT
  Cell(std::size_t v) : kind(Kind::number), number(static_cast<double>(v)) {}          // NOLINT
  Cell(std::string s) : kind(Kind::text), text(std::move(s)) {}                          // NOLINT
  Cell(const char* s) : kind(Kind::text), text(s) {}                                     // NOLINT
  static Cell empty() { return {}; }
};

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string to_string(const Cell& c) {
  switch (c.kind) {
    case Cell::Kind::number: return format_number(c.number);
    case Cell::Kind::text: return c.text;
    case Cell::Kind::empty: return "";
  }
  return "";
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// Optional `# generated <stamp>` first line, then header and rows.
inline void write_csv(std::ostream& os, const Table& t, const std::optional<std::string>& stamp) {
  if (stamp) os << "# generated " << *stamp << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << to_string(row[i]);
    os << "\n";
  }
}

/// {"generated": ..., "columns": [...], "rows": [{...}]}; "generated" sits
/// on its own line and is omitted without a stamp.
inline void write_json(std::ostream& os, const Table& t, const std::optional<std::string>& stamp) {
  nlohmann::ordered_json doc;
  if (stamp) doc["generated"] = *stamp;
  doc["columns"] = t.columns;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json obj;
    for (std::size_t i = 0; i < row.size(); ++i) {
      const auto& c = row[i];
      if (c.kind == Cell::Kind::number)
        obj[t.columns[i]] = c.number;
      else if (c.kind == Cell::Kind::text)
        obj[t.columns[i]] = c.text;
      else
        obj[t.columns[i]] = nullptr;
    }
    rows.push_back(std::move(obj));
  }
  doc["rows"] = std::move(rows);
  os << doc.dump(2) << "\n";
}

/// Fixed-width text rendering for stdout.
inline void write_text(std::ostream& os, const Table& t) {
  std::vector<std::size_t> width(t.columns.size());
  for (std::size_t i = 0; i < t.columns.size(); ++i) width[i] = t.columns[i].size();
  std::vector<std::vector<std::string>> cells;
  for (const auto& row : t.rows) {
    std::vector<std::string> r;
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::string s = row[i].kind == Cell::Kind::number ? [&] {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4g", row[i].number);
        return std::string(buf);
      }()
                                                        : to_string(row[i]);
      if (s.empty()) s = "-";
      width[i] = std::max(width[i], s.size());
      r.push_back(std::move(s));
    }
    cells.push_back(std::move(r));
  }
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "  " : "") << std::setw(static_cast<int>(width[i])) << t.columns[i];
  os << "\n";
  for (const auto& r : cells) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "  " : "") << std::setw(static_cast<int>(width[i])) << r[i];
    os << "\n";
  }
}

inline const std::vector<std::string>& convergence_columns() {
  static const std::vector<std::string> c{"case",     "c0",       "lambda",   "n",      "h",      "dt",
                                          "err_u_1h", "err_p_l2", "err_z_l2", "rate_u", "rate_p", "rate_z"};
  return c;
}

inline void append_convergence_rows(Table& t, const ConvergenceReport& rep) {
  for (std::size_t i = 0; i < rep.levels.size(); ++i) {
    const auto& l = rep.levels[i];
    std::vector<Cell> row{rep.case_name, rep.params.c0, rep.params.lambda, l.n, l.h, l.dt};
    if (l.ok()) {
      row.insert(row.end(), {l.errors.u_1h, l.errors.p_l2, l.errors.z_l2});
    } else {
      row.insert(row.end(), {Cell::empty(), Cell::empty(), Cell::empty()});
    }
    if (i == 0) {
      row.insert(row.end(), {Cell::empty(), Cell::empty(), Cell::empty()});
    } else {
      const auto& r = rep.rates[i - 1];
      row.insert(row.end(), {r.u, r.p, r.z});
    }
    t.rows.push_back(std::move(row));
  }
}

inline Table convergence_table(const ConvergenceReport& rep) {
  Table t{convergence_columns(), {}};
  append_convergence_rows(t, rep);
  return t;
}

inline Table locking_table(const std::vector<SweepCell>& cells) {
  Table t{convergence_columns(), {}};
  for (const auto& c : cells) append_convergence_rows(t, c.report);
  return t;
}

inline Table trajectory_table(const Trajectory& traj, const std::vector<StateErrors>& errs) {
  Table t{{"step", "t", "error_u_1h", "error_p_l2", "error_z_l2"}, {}};
  for (std::size_t j = 0; j < traj.size(); ++j)
    t.rows.push_back({j, traj[j].t, errs[j].u_1h, errs[j].p_l2, errs[j].z_l2});
  return t;
}

struct StabilityRow {
  std::size_t n = 0;
  double h = 0.0;
  double beta_rt = 0.0;
  double beta_sigma = 0.0;
  KornEstimate korn;
};

inline Table stability_table(const std::vector<StabilityRow>& rows) {
  Table t{{"n", "h", "beta_h", "beta_prime_h", "korn_constant", "korn_lambda_min", "korn_lambda_max"}, {}};
  for (const auto& r : rows)
    t.rows.push_back({r.n, r.h, r.beta_rt, r.beta_sigma, r.korn.constant, r.korn.lambda_min, r.korn.lambda_max});
  return t;
}

inline Table compatibility_table(const CompatibilityReport& rep) {
  Table t{{"initial_data", "integrator", "n", "steps", "pressure_increment", "max_state_norm", "max_err_u_1h",
           "max_err_p_l2", "max_err_z_l2", "final_err_p_l2"},
          {}};
  const std::string second = rep.incompatible ? "incompatible" : "compatible";
  auto add = [&](const std::string& init, const char* integ, const CompatibilityRun& r) {
    t.rows.push_back({init, integ, rep.n, rep.steps, r.pressure_increment, r.max_state_norm, r.max_errors.u_1h,
                      r.max_errors.p_l2, r.max_errors.z_l2, r.final_p_error});
  };
  add("compatible", "backward_euler", rep.be_compatible);
  add("compatible", "crank_nicolson", rep.cn_compatible);
  if (rep.incompatible) {
    add(second, "backward_euler", rep.be_initial);
    add(second, "crank_nicolson", rep.cn_initial);
  }
  return t;
}

}  // namespace biot::report

#endif  // BIOT_REPORT_HPP
