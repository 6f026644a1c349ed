#ifndef BIOT_CLI_HPP
#define BIOT_CLI_HPP

#include <cctype>
#include <charconv>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "errors.hpp"
#include "report.hpp"
#include "verify.hpp"

namespace biot::cli {

enum class Command { run, converge, infsup, locking, cn_experiment };
enum class Format { csv, json };

inline std::string command_name(Command c) {
  switch (c) {
    case Command::run: return "run";
    case Command::converge: return "converge";
    case Command::infsup: return "infsup";
    case Command::locking: return "locking";
    case Command::cn_experiment: return "cn-experiment";
  }
  return "?";
}

struct RunConfig {
  Command command = Command::converge;
  std::string case_name = "smooth";
  std::vector<std::size_t> levels;
  double final_time = 0.5;
  std::optional<std::size_t> n;
  std::optional<std::size_t> steps;  // empty: N = n
  MaterialParams params;
  BoundarySpec boundary = BoundarySpec::whole_boundary();
  std::string output;
  Format format = Format::csv;
  bool timestamp = true;
  bool incompatible = false;
  std::string dump_mesh, dump_matrix, dump_coefficients;

  std::size_t steps_for(std::size_t level) const { return steps.value_or(level); }
};

/// Keys accepted in a config file; flags use the same names with `--`.
inline const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> k{"command", "case",         "levels",    "T0",          "N",
                                          "n",       "mu",           "lambda",    "c0",          "boundary",
                                          "output",  "format",       "no-timestamp", "incompatible", "dump-mesh",
                                          "dump-matrix", "dump-coefficients"};
  return k;
}

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::size_t parse_size(const std::string& key, const std::string& s) {
  std::size_t v = 0;
  const auto t = trim(s);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw ConfigError(key, "malformed value '" + s + "' for '" + key + "' (expected a nonnegative integer)");
  return v;
}

inline double parse_double(const std::string& key, const std::string& s) {
  const auto t = trim(s);
  std::istringstream is(t);
  is.imbue(std::locale::classic());
  double v = 0.0;
  is >> v;
  if (t.empty() || is.fail() || !is.eof())
    throw ConfigError(key, "malformed value '" + s + "' for '" + key + "' (expected a number)");
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& s) {
  const auto t = trim(s);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(key, "malformed value '" + s + "' for '" + key + "' (expected true or false)");
}

inline std::vector<std::size_t> parse_levels(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_size("levels", item));
  if (out.empty()) throw ConfigError("levels", "malformed value '" + s + "' for 'levels'");
  try {
    validate_levels(out);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("levels", e.what());
  }
  return out;
}

inline Command parse_command(const std::string& s) {
  for (auto c : {Command::run, Command::converge, Command::infsup, Command::locking, Command::cn_experiment})
    if (command_name(c) == s) return c;
  throw ConfigError("command", "unknown command '" + s + "' (expected run, converge, infsup, locking or cn-experiment)");
}

/// "default", or a comma list `side:XY` for all four sides with X in {p, f}
/// (pressure or flux) and Y in {d, t} (displacement or traction).
inline BoundarySpec parse_boundary(const std::string& s) {
  const auto t = trim(s);
  if (t == "default") return BoundarySpec::whole_boundary();
  BoundarySpec spec;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    const auto colon = item.find(':');
    const std::string side = colon == std::string::npos ? item : item.substr(0, colon);
    const std::string kind = colon == std::string::npos ? "" : item.substr(colon + 1);
    int k = -1;
    for (int i = 0; i < 4; ++i)
      if (side == side_name(static_cast<Side>(i))) k = i;
    if (k < 0 || kind.size() != 2 || (kind[0] != 'p' && kind[0] != 'f') || (kind[1] != 'd' && kind[1] != 't'))
      throw ConfigError("boundary", "malformed boundary entry '" + item + "' (expected side:[pf][dt])");
    if (spec.pressure[k]) throw ConfigError("boundary", "side '" + side + "' listed twice");
    spec.pressure[k] = kind[0] == 'p' ? PressureBC::pressure : PressureBC::flux;
    spec.displacement[k] = kind[1] == 'd' ? DisplacementBC::displacement : DisplacementBC::traction;
  }
  for (int i = 0; i < 4; ++i)
    if (!spec.pressure[i])
      throw ConfigError("boundary", std::string("side '") + side_name(static_cast<Side>(i)) + "' is not tagged");
  try {
    tag_boundary(build_structured_mesh(1), spec);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("boundary", e.what());
  }
  return spec;
}

}  // namespace detail

/// Flat `key=value` pairs, one per line; '#' starts a comment.
inline std::map<std::string, std::string> read_config_file(std::istream& is) {
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(line, "line " + std::to_string(lineno) + ": expected key=value, got '" + line + "'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw ConfigError(key, "unknown key '" + key + "' on line " + std::to_string(lineno));
    if (out.count(key)) throw ConfigError(key, "duplicate key '" + key + "' on line " + std::to_string(lineno));
    out[key] = value;
  }
  return out;
}

/// Builds and validates a RunConfig from merged key/value pairs.
inline RunConfig config_from_values(const std::map<std::string, std::string>& v) {
  auto get = [&](const std::string& k) -> const std::string* {
    const auto it = v.find(k);
    return it == v.end() ? nullptr : &it->second;
  };
  RunConfig c;
  const auto* cmd = get("command");
  if (!cmd) throw ConfigError("command", "missing required field 'command'");
  c.command = detail::parse_command(*cmd);
  const std::string name = command_name(c.command);

  if (const auto* s = get("case"))
    c.case_name = *s;
  else if (c.command == Command::locking)
    c.case_name = "divfree";
  if (c.case_name != "smooth" && c.case_name != "divfree")
    throw ConfigError("case", "unknown case '" + c.case_name + "' (expected smooth or divfree)");

  if (const auto* s = get("T0")) c.final_time = detail::parse_double("T0", *s);
  if (!(c.final_time > 0.0 && std::isfinite(c.final_time))) throw ConfigError("T0", "T0 must be positive");
  if (const auto* s = get("mu")) c.params.mu = detail::parse_double("mu", *s);
  if (const auto* s = get("lambda")) c.params.lambda = detail::parse_double("lambda", *s);
  if (const auto* s = get("c0")) c.params.c0 = detail::parse_double("c0", *s);
  if (!(c.params.mu > 0.0 && std::isfinite(c.params.mu))) throw ConfigError("mu", "mu must be positive");
  if (!(c.params.lambda > 0.0 && std::isfinite(c.params.lambda))) throw ConfigError("lambda", "lambda must be positive");
  if (!(c.params.c0 >= 0.0 && std::isfinite(c.params.c0))) throw ConfigError("c0", "c0 must be nonnegative");

  if (const auto* s = get("n")) {
    c.n = detail::parse_size("n", *s);
    if (*c.n == 0) throw ConfigError("n", "n must be positive");
  }
  if (const auto* s = get("N")) {
    c.steps = detail::parse_size("N", *s);
    if (*c.steps == 0) throw ConfigError("N", "N must be positive");
  }
  if (const auto* s = get("levels")) c.levels = detail::parse_levels(*s);
  if (c.levels.empty()) {
    if (c.command == Command::converge) c.levels = {4, 8, 16, 32};
    if (c.command == Command::infsup) c.levels = {2, 4, 8};
    if (c.command == Command::locking) c.levels = {4, 8, 16};
  }
  if ((c.command == Command::run || c.command == Command::cn_experiment) && !c.n)
    throw ConfigError("n", "missing required field 'n' for command " + name);

  if (const auto* s = get("boundary")) c.boundary = detail::parse_boundary(*s);
  if (!c.boundary.is_default() && c.command != Command::infsup)
    throw ConfigError("boundary", "command " + name +
                                      " uses the builtin cases, which need the default boundary (u = 0, p = 0)");

  if (const auto* s = get("format")) {
    if (*s == "csv")
      c.format = Format::csv;
    else if (*s == "json")
      c.format = Format::json;
    else
      throw ConfigError("format", "unknown format '" + *s + "' (expected csv or json)");
  }
  c.output = name + (c.format == Format::csv ? ".csv" : ".json");
  if (const auto* s = get("output")) {
    if (s->empty()) throw ConfigError("output", "output path is empty");
    c.output = *s;
  }
  if (const auto* s = get("no-timestamp")) c.timestamp = !detail::parse_bool("no-timestamp", *s);
  if (const auto* s = get("incompatible")) c.incompatible = detail::parse_bool("incompatible", *s);
  if (const auto* s = get("dump-mesh")) c.dump_mesh = *s;
  if (const auto* s = get("dump-matrix")) c.dump_matrix = *s;
  if (const auto* s = get("dump-coefficients")) c.dump_coefficients = *s;
  if ((!c.dump_mesh.empty() || !c.dump_matrix.empty() || !c.dump_coefficients.empty()) && c.command != Command::run)
    throw ConfigError(!c.dump_mesh.empty() ? "dump-mesh" : !c.dump_matrix.empty() ? "dump-matrix" : "dump-coefficients",
                      "dumps are only written by command run");
  return c;
}

/// Result of argv parsing: either a config or a request for help text.
struct ParsedArgs {
  std::optional<RunConfig> config;
  std::string help;
};

/// Parses `args` (without the program name). Flags override values read
/// from --config.
inline ParsedArgs parse_arguments(const std::vector<std::string>& args) {
  CLI::App app{"Biot consolidation solver and verification harness", "biot_cli"};
  std::string command, config_path;
  std::map<std::string, CLI::Option*> opts;
  app.add_option("command", command, "run | converge | infsup | locking | cn-experiment");
  app.add_option("--config", config_path, "flat key=value file; flags override its values");
  const std::vector<std::pair<std::string, std::string>> valued{
      {"case", "smooth | divfree (default smooth; locking uses divfree)"},
      {"levels", "comma list of mesh levels, each double the previous"},
      {"T0", "final time (default 0.5)"},
      {"N", "number of time steps for run / cn-experiment (default N = n)"},
      {"n", "mesh level for run / cn-experiment"},
      {"mu", "Lame mu (default 1)"},
      {"lambda", "Lame lambda (default 1)"},
      {"c0", "storage coefficient (default 1)"},
      {"boundary", "default | bottom:XY,right:XY,top:XY,left:XY with X in {p,f}, Y in {d,t}"},
      {"output", "report path (default <command>.csv or .json)"},
      {"format", "csv | json (default csv)"},
      {"dump-mesh", "run: write the mesh to this path"},
      {"dump-matrix", "run: write the step matrix in coordinate form"},
      {"dump-coefficients", "run: directory for one coefficient file per step"}};
  std::map<std::string, std::string> raw;
  for (const auto& [key, help] : valued) opts[key] = app.add_option("--" + key, raw[key], help);
  bool no_timestamp = false, incompatible = false;
  auto* nt = app.add_flag("--no-timestamp", no_timestamp, "omit the timestamp header line");
  auto* inc = app.add_flag("--incompatible", incompatible, "cn-experiment: also start from U0 = 0");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    return {std::nullopt, app.help()};
  } catch (const CLI::ParseError& e) {
    // Name the first unrecognised flag when there is one.
    std::string key = "argv";
    for (const auto& a : args) {
      const std::string flag = a.substr(0, a.find('='));
      if (flag.rfind("--", 0) == 0 && !app.get_option_no_throw(flag)) {
        key = flag.substr(2);
        break;
      }
    }
    throw ConfigError(key, e.what());
  }

  std::map<std::string, std::string> values;
  if (!config_path.empty()) {
    std::ifstream f(config_path);
    if (!f) throw ConfigError("config", "cannot open config file '" + config_path + "'");
    values = read_config_file(f);
  }
  if (!command.empty()) values["command"] = command;
  for (const auto& [key, opt] : opts)
    if (opt->count() > 0) values[key] = raw[key];
  if (nt->count() > 0) values["no-timestamp"] = no_timestamp ? "true" : "false";
  if (inc->count() > 0) values["incompatible"] = incompatible ? "true" : "false";
  return {config_from_values(values), {}};
}

inline RunConfig parse_config(const std::vector<std::string>& args) {
  auto p = parse_arguments(args);
  if (!p.config) throw ConfigError("help", "help requested");
  return *p.config;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace detail {

inline void write_report(const RunConfig& c, const report::Table& t) {
  std::ofstream f(c.output, std::ios::binary);
  if (!f) throw ConfigError("output", "cannot write '" + c.output + "'");
  const auto stamp = c.timestamp ? std::optional<std::string>(utc_timestamp()) : std::nullopt;
  if (c.format == Format::csv)
    report::write_csv(f, t, stamp);
  else
    report::write_json(f, t, stamp);
  if (!f) throw ConfigError("output", "failed writing '" + c.output + "'");
}

inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

template <class Open>
void dump_to(const std::string& path, const std::string& key, Open&& write) {
  std::ofstream f(path);
  if (!f) throw ConfigError(key, "cannot write '" + path + "'");
  write(f);
}

inline void write_coefficients(std::ostream& os, const SystemState& s) {
  os.precision(17);
  os << "t " << s.t << "\n";
  for (const auto& [name, v] : {std::pair{"u", &s.u}, {"z", &s.z}, {"p", &s.p}}) {
    os << name << " " << v->size() << "\n";
    for (const double x : *v) os << x << "\n";
  }
}

/// Returns the failure lines of a study (one per failed level).
inline std::vector<std::string> level_failures(const std::string& command, const ConvergenceReport& rep) {
  std::vector<std::string> out;
  for (const auto& l : rep.levels)
    if (!l.ok()) {
      char cell[96];
      std::snprintf(cell, sizeof cell, "c0=%g,lambda=%g", rep.params.c0, rep.params.lambda);
      out.push_back("error kind=numerical command=" + command + " cell=" + cell + " level=" + std::to_string(l.n) +
                    " message=" + quote(l.failure));
    }
  return out;
}

}  // namespace detail

/// Runs the configured command; the returned status is the process exit
/// code (0 ok, 2 config error, 3 numerical failure).
inline int execute(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const std::string name = command_name(c.command);
  try {
    std::vector<std::string> failures;
    switch (c.command) {
      case Command::run: {
        const std::size_t n = *c.n, steps = c.steps_for(*c.n);
        const auto cs = builtin_case(c.case_name, c.params);
        const Discretization d(build_structured_mesh(n), c.boundary);
        const auto ops = assemble_operators(d, c.params);
        const TimeGrid grid(c.final_time, steps);
        if (!c.dump_mesh.empty()) detail::dump_to(c.dump_mesh, "dump-mesh", [&](auto& f) { write_mesh(f, d.mesh, d.tags); });
        if (!c.dump_matrix.empty())
          detail::dump_to(c.dump_matrix, "dump-matrix", [&](auto& f) { write_coordinates(f, step_matrix(ops, grid.dt())); });
        const auto traj = run_transient(ops, grid, cs);
        const auto errs = trajectory_errors(d, traj, cs);
        if (!c.dump_coefficients.empty()) {
          std::error_code ec;
          std::filesystem::create_directories(c.dump_coefficients, ec);
          for (std::size_t j = 0; j < traj.size(); ++j) {
            char file[32];
            std::snprintf(file, sizeof file, "step_%05zu.txt", j);
            detail::dump_to((std::filesystem::path(c.dump_coefficients) / file).string(), "dump-coefficients",
                            [&](auto& f) { detail::write_coefficients(f, traj[j]); });
          }
        }
        const auto table = report::trajectory_table(traj, errs);
        out << name << ": case=" << c.case_name << " n=" << n << " N=" << steps << " T0=" << c.final_time << "\n";
        report::write_text(out, table);
        detail::write_report(c, table);
        break;
      }
      case Command::converge: {
        const auto rep = convergence_study(c.case_name, c.params, c.levels, c.final_time);
        const auto table = report::convergence_table(rep);
        out << name << ": case=" << c.case_name << " T0=" << c.final_time << " dt=T0/n\n";
        report::write_text(out, table);
        detail::write_report(c, table);
        failures = detail::level_failures(name, rep);
        break;
      }
      case Command::infsup: {
        std::vector<report::StabilityRow> rows;
        for (std::size_t n : c.levels) {
          try {
            const Discretization d(build_structured_mesh(n), c.boundary);
            rows.push_back({n, d.h(), estimate_inf_sup_rt(d), estimate_inf_sup_sigma(d), korn_constant(d)});
          } catch (const NumericalError& e) {
            throw NumericalError("level " + std::to_string(n) + ": " + e.what());
          }
        }
        const auto table = report::stability_table(rows);
        report::write_text(out, table);
        detail::write_report(c, table);
        break;
      }
      case Command::locking: {
        const auto cells = locking_sweep(c.levels, c.params.mu, c.final_time, default_sweep_c0(),
                                         default_sweep_lambda(), c.case_name);
        const auto table = report::locking_table(cells);
        out << name << ": case=" << c.case_name << " mu=" << c.params.mu << " T0=" << c.final_time << "\n";
        report::write_text(out, table);
        detail::write_report(c, table);
        for (const auto& cell : cells)
          for (auto& f : detail::level_failures(name, cell.report)) failures.push_back(std::move(f));
        break;
      }
      case Command::cn_experiment: {
        const std::size_t n = *c.n, steps = c.steps_for(*c.n);
        const auto rep = compatibility_experiment(c.case_name, c.params, n, steps, c.final_time, c.incompatible);
        const auto table = report::compatibility_table(rep);
        out << name << ": case=" << c.case_name << " n=" << n << " N=" << steps << "\n";
        report::write_text(out, table);
        if (rep.incompatible) {
          out << "step-1 pressure increment, incompatible start: BE " << rep.be_initial.pressure_increment << ", CN "
              << rep.cn_initial.pressure_increment << "\n";
          out << "BE max-norm ratio incompatible/compatible: "
              << rep.be_initial.max_state_norm / rep.be_compatible.max_state_norm << "\n";
        }
        detail::write_report(c, table);
        break;
      }
    }
    for (const auto& f : failures) err << f << "\n";
    return failures.empty() ? 0 : 3;
  } catch (const ConfigError& e) {
    err << "error kind=config command=" << name << " key=" << e.key() << " message=" << detail::quote(e.what()) << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error kind=numerical command=" << name << " message=" << detail::quote(e.what()) << "\n";
    return 3;
  }
}

/// argv entry point shared by the executable and the tests.
inline int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    auto parsed = parse_arguments(args);
    if (!parsed.config) {
      out << parsed.help;
      return 0;
    }
    return execute(*parsed.config, out, err);
  } catch (const ConfigError& e) {
    err << "error kind=config key=" << e.key() << " message=" << detail::quote(e.what()) << "\n";
    return 2;
  }
}

}  // namespace biot::cli

#endif  // BIOT_CLI_HPP
