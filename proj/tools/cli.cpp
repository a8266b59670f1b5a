// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "pilotcap/sequences.hpp"
#include "pilotcap/simulator.hpp"

namespace pilotcap::cli {

namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

Error config_error(const std::string& what) { return Error(Errc::config_parse_error, what); }

json load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  json config;
  try {
    config = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw config_error(fmt::format("{}:{}:{}: {}", path.string(), line, column, e.what()));
  }
  if (!config.is_object()) throw config_error("top-level value must be an object");
  if (!config.contains("schema_version") || config["schema_version"] != kSchemaVersion) {
    throw config_error(fmt::format("schema_version must be {}", kSchemaVersion));
  }
  return config;
}

template <typename T>
T require(const json& config, const char* key) {
  if (!config.contains(key)) throw config_error(fmt::format("missing key '{}'", key));
  try {
    return config.at(key).get<T>();
  } catch (const json::exception& e) {
    throw config_error(fmt::format("key '{}': {}", key, e.what()));
  }
}

template <typename T>
T optional_value(const json& config, const char* key, T fallback) {
  return config.contains(key) ? require<T>(config, key) : fallback;
}

bool uses_db(const json& config) {
  const auto units = optional_value<std::string>(config, "units", "linear");
  if (units == "dB" || units == "db") return true;
  if (units == "linear") return false;
  throw config_error("units must be \"linear\" or \"dB\"");
}

double to_linear(double value, bool db) { return db ? std::pow(10.0, value / 10.0) : value; }

Vector read_gammas(const json& config, const char* key) {
  const bool db = uses_db(config);
  const auto raw = require<std::vector<double>>(config, key);
  Vector out(static_cast<Index>(raw.size()));
  for (std::size_t i = 0; i < raw.size(); ++i) out(static_cast<Index>(i)) = to_linear(raw[i], db);
  return out;
}

std::vector<double> read_axis(const json& axis, bool db) {
  std::vector<double> values;
  if (axis.contains("values")) {
    values = require<std::vector<double>>(axis, "values");
  } else {
    const auto lo = require<double>(axis, "min");
    const auto hi = require<double>(axis, "max");
    const auto count = require<int>(axis, "count");
    const auto spacing = optional_value<std::string>(axis, "spacing", "linear");
    if (count < 1) throw config_error("axis count must be positive");
    if (spacing != "linear" && spacing != "log") throw config_error("spacing must be linear or log");
    if (spacing == "log" && (lo <= 0.0 || hi <= 0.0)) throw config_error("log axis needs positive bounds");
    for (int i = 0; i < count; ++i) {
      const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
      values.push_back(spacing == "log" ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t);
    }
  }
  for (double& v : values) v = to_linear(v, db);
  return values;
}

std::optional<FosGrouping> read_grouping(const json& config, Index users) {
  if (!config.contains("grouping")) return std::nullopt;
  return FosGrouping(require<std::vector<std::vector<Index>>>(config, "grouping"), users);
}

json rounded(double value) {
  if (!std::isfinite(value)) return format_number(value);
  return std::stod(format_number(value));
}

json rounded(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(rounded(v(i)));
  return out;
}

json rounded_rows(const Matrix& m) {
  json out = json::array();
  for (Index r = 0; r < m.rows(); ++r) out.push_back(rounded(Vector(m.row(r).transpose())));
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::invalid_argument, "cannot write " + path.string());
  out << content;
}

std::string csv_header_line(const std::string& command, const CommandOptions& options) {
  std::string line = fmt::format("# schema_version={} command={}", kSchemaVersion, command);
  if (options.seed) line += fmt::format(" seed={}", *options.seed);
  return line + "\n";
}

void write_metadata(const CommandOptions& options, const json& config, json extra,
                    const std::string& stem) {
  json meta = std::move(extra);
  meta["schema_version"] = kSchemaVersion;
  meta["command"] = options.command;
  meta["config"] = config;
  if (options.seed) meta["seed"] = *options.seed;
  write_file(options.out_dir / (stem + ".meta.json"), meta.dump(2) + "\n");
}

std::vector<Scheme> selected_schemes(const CommandOptions& options) {
  if (options.scheme) return {*options.scheme};
  return {Scheme::gwbe, Scheme::wbe, Scheme::fos};
}

struct SweepColumn {
  std::string label;
  Scheme scheme;
  FosPolicy policy;
};

// FOS gets two columns: optimal grouping and the index-order grouping.
std::vector<SweepColumn> sweep_columns(const std::vector<Scheme>& schemes) {
  std::vector<SweepColumn> cols;
  for (Scheme s : schemes) {
    cols.push_back({std::string(to_string(s)), s, FosPolicy::optimal});
    if (s == Scheme::fos) cols.push_back({"fos_index_order", s, FosPolicy::index_order});
  }
  return cols;
}

json column_names(const std::vector<SweepColumn>& cols) {
  json names = json::array();
  for (const auto& c : cols) names.push_back(c.label);
  return names;
}

json scheme_names(const std::vector<Scheme>& schemes) {
  json names = json::array();
  for (Scheme s : schemes) names.push_back(std::string(to_string(s)));
  return names;
}

int cmd_design(const CommandOptions& options, const json& config, std::ostream& out) {
  const auto req = validate_requirements(read_gammas(config, "gammas"), require<Index>(config, "tau"));
  const double c = optional_value<double>(config, "c", 1.0);
  const Allocation alloc = gwbe_design(req, c);
  const ValidityReport report = verify_validity(alloc);

  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = "design";
  doc["users"] = req.users();
  doc["tau"] = req.tau();
  doc["c"] = rounded(c);
  doc["targets"] = rounded(req.gammas());
  doc["achieved_gammas"] = rounded(alloc.achieved_gammas());
  doc["pilots"] = rounded_rows(alloc.pilots().s());
  doc["powers"] = rounded(alloc.powers().p());
  doc["sinr"] = rounded(report.sinr);
  doc["null_residual"] = rounded(report.null_residual);
  doc["valid"] = report.valid;
  if (options.seed) doc["seed"] = *options.seed;
  const auto path = options.out_dir / "design.json";
  write_file(path, doc.dump(2) + "\n");
  out << "design written to " << path.string() << " residual=" << format_number(report.null_residual)
      << (report.valid ? " valid" : " INVALID") << "\n";
  return report.valid ? kSuccess : kNumericalFailure;
}

int cmd_check(const CommandOptions& options, const json& config, std::ostream& out) {
  const auto req = validate_requirements(read_gammas(config, "gammas"), require<Index>(config, "tau"));
  const Scheme scheme = options.scheme.value_or(
      parse_scheme(optional_value<std::string>(config, "scheme", "gwbe")));
  const double tau = static_cast<double>(req.tau());
  const double load = req.load();
  std::string verdict;
  std::string binding;
  double slack = 0.0;

  switch (scheme) {
    case Scheme::gwbe: {
      const auto check = gwbe_admissible(req);
      const auto bound = upper_bound_check(req);
      if (check.admissible) {
        verdict = "ADMISSIBLE";
        binding = "load";
        slack = tau - load;
      } else if (bound.holds) {
        verdict = "UNKNOWN";
        binding = "load";
        slack = tau - load;
      } else {
        verdict = "NOT-ADMISSIBLE";
        binding = "user_bound";
        slack = bound.slack;
      }
      break;
    }
    case Scheme::wbe: {
      if (req.users() <= req.tau()) {
        verdict = "ADMISSIBLE";
        binding = "orthogonal";
        slack = tau - static_cast<double>(req.users());
        break;
      }
      const double kappa = static_cast<double>((req.users() - 1) * req.tau()) /
                           static_cast<double>(req.users() - req.tau());
      const double max_user_limit = kappa - (kappa - 1.0) * effective_load(req.gammas().maxCoeff());
      binding = max_user_limit < tau ? "max_user" : "load";
      slack = std::min(tau, max_user_limit) - load;
      verdict = wbe_admissible(req) ? "ADMISSIBLE" : "NOT-ADMISSIBLE";
      break;
    }
    case Scheme::fos: {
      const auto grouping = read_grouping(config, req.users()).value_or(fos_optimal_grouping(req));
      const Vector loads = group_loads(req, grouping);
      Index worst = 0;
      loads.maxCoeff(&worst);
      const double group_slack = 1.0 - loads(worst);
      if (group_slack < tau - load) {
        binding = fmt::format("group_{}", worst);
        slack = group_slack;
      } else {
        binding = "load";
        slack = tau - load;
      }
      verdict = fos_admissible(req, grouping) ? "ADMISSIBLE" : "NOT-ADMISSIBLE";
      break;
    }
  }
  out << verdict << " scheme=" << to_string(scheme) << " binding=" << binding
      << " slack=" << format_number(std::abs(slack) < 1e-12 ? 0.0 : slack) << "\n";
  return kSuccess;
}

int cmd_region(const CommandOptions& options, const json& config, std::ostream& out) {
  const bool db = uses_db(config);
  RegionProblem problem;
  problem.base_gammas = read_gammas(config, "base_gammas");
  problem.tau = require<Index>(config, "tau");
  problem.free_axes = require<std::vector<Index>>(config, "free_axes");
  problem.cap = to_linear(optional_value<double>(config, "cap", 5.0), db);
  if (!config.contains("grid") || !config["grid"].is_array()) {
    throw config_error("'grid' must be an array of axis specs");
  }
  for (const auto& axis : config["grid"]) problem.grid.push_back(read_axis(axis, db));
  problem.grouping = read_grouping(config, problem.base_gammas.size());

  const auto schemes = selected_schemes(options);
  std::vector<std::vector<RegionPoint>> columns;
  for (Scheme s : schemes) columns.push_back(region_boundary(problem, s));

  std::string csv = csv_header_line("region", options);
  for (std::size_t a = 0; a + 1 < problem.free_axes.size(); ++a) {
    csv += fmt::format("gamma_{},", problem.free_axes[a] + 1);
  }
  for (std::size_t s = 0; s < schemes.size(); ++s) {
    csv += fmt::format("{}{}", to_string(schemes[s]), s + 1 < schemes.size() ? "," : "\n");
  }
  for (std::size_t row = 0; row < columns.front().size(); ++row) {
    for (double coord : columns.front()[row].coords) csv += format_number(coord) + ",";
    for (std::size_t s = 0; s < schemes.size(); ++s) {
      csv += format_number(columns[s][row].boundary) + (s + 1 < schemes.size() ? "," : "\n");
    }
  }
  write_file(options.out_dir / "region.csv", csv);
  write_metadata(options, config,
                 {{"schemes", scheme_names(schemes)},
                  {"solved_axis", problem.free_axes.back()},
                  {"rows", columns.front().size()}},
                 "region");
  out << "region: " << columns.front().size() << " grid points\n";
  return kSuccess;
}

Vector head_tail_weights(const std::vector<double>& head, double tail, Index users) {
  Vector w(users);
  for (Index i = 0; i < users; ++i) {
    w(i) = static_cast<std::size_t>(i) < head.size() ? head[static_cast<std::size_t>(i)] : tail;
  }
  return w;
}

int cmd_sweep_k(const CommandOptions& options, const json& config, std::ostream& out) {
  const Index tau = require<Index>(config, "tau");
  const Index k_min = require<Index>(config, "k_min");
  const Index k_max = require<Index>(config, "k_max");
  const auto head = require<std::vector<double>>(config, "head_weights");
  const double tail = require<double>(config, "tail_weight");
  AchievableOptions opts;
  opts.rel_tol = optional_value<double>(config, "tol", Tolerances::bisection);
  if (k_min < 1 || k_max < k_min) throw config_error("need 1 <= k_min <= k_max");

  const auto cols = sweep_columns(selected_schemes(options));
  std::string csv = csv_header_line("sweep-k", options) + "K";
  for (const auto& c : cols) csv += "," + c.label;
  csv += "\n";
  for (Index k = k_min; k <= k_max; ++k) {
    const auto pattern = weighted_pattern(head_tail_weights(head, tail, k), tau);
    csv += std::to_string(k);
    for (const auto& c : cols) {
      double value = 0.0;
      try {
        opts.fos_policy = c.policy;
        value = achievable_sinr(pattern, c.scheme, opts);
      } catch (const Error& e) {
        if (e.code() != Errc::no_feasible_scale) throw;
      }
      csv += "," + format_number(value);
    }
    csv += "\n";
  }
  write_file(options.out_dir / "sweep_k.csv", csv);
  write_metadata(options, config, {{"columns", column_names(cols)}}, "sweep_k");
  out << "sweep-k: " << (k_max - k_min + 1) << " rows\n";
  return kSuccess;
}

int cmd_sweep_tau(const CommandOptions& options, const json& config, std::ostream& out) {
  const Index tau_min = require<Index>(config, "tau_min");
  const Index tau_max = require<Index>(config, "tau_max");
  const Vector base = read_gammas(config, "level_gammas");
  if (tau_min < 1 || tau_max < tau_min) throw config_error("need 1 <= tau_min <= tau_max");
  const auto pattern = repeated_pattern(base);

  const auto cols = sweep_columns(selected_schemes(options));
  std::string csv = csv_header_line("sweep-tau", options) + "tau";
  for (const auto& c : cols) csv += "," + c.label;
  csv += "\n";
  for (Index tau = tau_min; tau <= tau_max; ++tau) {
    csv += std::to_string(tau);
    for (const auto& c : cols) {
      csv += "," + std::to_string(max_admissible_users(pattern, tau, c.scheme, 100000, c.policy));
    }
    csv += "\n";
  }
  write_file(options.out_dir / "sweep_tau.csv", csv);
  write_metadata(options, config, {{"columns", column_names(cols)}}, "sweep_tau");
  out << "sweep-tau: " << (tau_max - tau_min + 1) << " rows\n";
  return kSuccess;
}

int cmd_simulate(const CommandOptions& options, const json& config, std::ostream& out) {
  const auto req = validate_requirements(read_gammas(config, "gammas"), require<Index>(config, "tau"));
  const double c = optional_value<double>(config, "c", 1.0);
  const Scheme scheme = options.scheme.value_or(
      parse_scheme(optional_value<std::string>(config, "scheme", "gwbe")));

  SimScenario scenario;
  scenario.sigma_z_sq = optional_value<double>(config, "sigma_z_sq", scenario.sigma_z_sq);
  scenario.sigma_w_sq = optional_value<double>(config, "sigma_w_sq", scenario.sigma_w_sq);
  scenario.n_trials = optional_value<Index>(config, "n_trials", scenario.n_trials);
  scenario.seed = options.seed.value_or(optional_value<std::uint64_t>(config, "seed", 0));
  const auto m_values =
      optional_value<std::vector<Index>>(config, "m_values", {scenario.m_antennas});
  scenario.m_antennas = m_values.front();
  scenario.validate();

  std::optional<PilotMatrix> pilots;
  std::optional<PowerAllocation> powers;
  switch (scheme) {
    case Scheme::gwbe: {
      auto alloc = gwbe_design(req, c);
      pilots = alloc.pilots();
      powers = alloc.powers();
      break;
    }
    case Scheme::wbe:
      pilots = wbe_sequences(req.users(), req.tau()).pilots;
      powers = scheme_powers(req, c);
      break;
    case Scheme::fos: {
      const auto grouping = read_grouping(config, req.users()).value_or(fos_optimal_grouping(req));
      pilots = fos_pilots(req.users(), req.tau(), grouping);
      powers = scheme_powers(req, c);
      break;
    }
  }

  const auto rows = convergence_sweep(scenario, m_values, *pilots, *powers);
  CommandOptions echoed = options;
  echoed.seed = scenario.seed;
  std::string csv = csv_header_line("simulate", echoed) +
                    "M,user,empirical_sinr,predicted_sinr,relative_gap,standard_error\n";
  for (const auto& row : rows) {
    csv += fmt::format("{},{},{},{},{},{}\n", row.m_antennas, row.user + 1, format_number(row.empirical),
                       format_number(row.predicted), format_number(row.relative_gap),
                       format_number(row.standard_error));
  }
  write_file(options.out_dir / "simulate.csv", csv);
  write_metadata(echoed, config, {{"scheme", std::string(to_string(scheme))}}, "simulate");
  out << "simulate: " << rows.size() << " rows, seed " << scenario.seed << "\n";
  return kSuccess;
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::infeasible_requirements:
    case Errc::infeasible_fixed_part:
    case Errc::no_feasible_scale:
      return kInfeasible;
    case Errc::numerical_failure:
    case Errc::construction_failure:
    case Errc::not_majorized:
    case Errc::zero_norm_estimate:
      return kNumericalFailure;
    default:
      return kInputError;
  }
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return fmt::format("{:.9g}", value);
}

int run_command(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  try {
    const json config = load_config(options.config);
    std::filesystem::create_directories(options.out_dir);
    if (options.command == "design") return cmd_design(options, config, out);
    if (options.command == "check") return cmd_check(options, config, out);
    if (options.command == "region") return cmd_region(options, config, out);
    if (options.command == "sweep-k") return cmd_sweep_k(options, config, out);
    if (options.command == "sweep-tau") return cmd_sweep_tau(options, config, out);
    if (options.command == "simulate") return cmd_simulate(options, config, out);
    err << "unknown command '" << options.command << "'\n";
    return kInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
}

int run(int argc, char** argv) {
  CLI::App app{"User capacity, pilot design and link simulation for pilot-contaminated massive MIMO"};
  app.require_subcommand(1);
  CommandOptions options;
  std::string scheme;
  std::uint64_t seed = 0;

  for (const char* name : {"design", "check", "region", "sweep-k", "sweep-tau", "simulate"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", options.config, "JSON configuration file")->required();
    sub->add_option("--scheme", scheme, "gwbe | wbe | fos");
    sub->add_option("--out", options.out_dir, "Output directory");
    sub->add_option("--seed", seed, "RNG seed (overrides the config)");
    sub->callback([&options, name] { options.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kSuccess : kInputError;
  }
  try {
    if (!scheme.empty()) options.scheme = parse_scheme(scheme);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  for (auto* sub : app.get_subcommands()) {
    if (sub->get_option("--seed")->count() > 0) options.seed = seed;
  }
  return run_command(options, std::cout, std::cerr);
}

}  // namespace pilotcap::cli
