#pragma once

// Dispatch of run / sweep / suite configurations and deterministic output:
// CSV tables, a JSON summary and a gnuplot script per run.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "ineqlab/cli/config.hpp"
#include "ineqlab/cli/experiments.hpp"
#include "ineqlab/cli/outcome.hpp"
#include "ineqlab/defaults.hpp"

namespace ineqlab::cli {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitFailed = 2 };

struct Options {
  std::filesystem::path out_dir = "ineqlab-out";
  std::optional<std::uint64_t> seed;
  double tol_scale = 1.0;
};

/// INEQLAB_WORKERS if set, otherwise the hardware concurrency; at most `jobs`.
inline std::size_t worker_count(std::size_t jobs) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("INEQLAB_WORKERS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw UsageError("environment INEQLAB_WORKERS: expected a positive integer, got '" + std::string(env) + "'");
    n = static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::min(n, jobs));
}

/// Runs body(i) for i in [0, n) on a bounded pool; the caller orders results by i.
template <class Body>
void parallel_for(std::size_t n, std::size_t workers, Body&& body) {
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) body(i);
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
  os << text;
}

inline std::string csv_name(const std::string& stem, const Table& t) {
  return stem + (t.suffix.empty() ? "" : "_" + t.suffix) + ".csv";
}

inline std::string plot_script(const std::string& stem, const std::vector<Table>& tables) {
  std::ostringstream os;
  os << "# gnuplot script; run from the directory holding the CSV files\n"
     << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set terminal pngcairo size 900,600 noenhanced\n";
  for (const auto& t : tables) {
    const std::string csv = csv_name(stem, t);
    os << "\nset output '" << csv.substr(0, csv.size() - 4) << ".png'\n";
    os << "set xlabel '" << t.x << "'\n";
    if (t.logx) os << "set logscale x\n";
    if (t.logy) os << "set logscale y\n";
    os << "plot ";
    for (std::size_t i = 0; i < t.ys.size(); ++i) {
      os << (i ? ", " : "") << "'" << csv << "' using (column('" << t.x << "')):(column('" << t.ys[i]
         << "')) with linespoints title '" << t.ys[i] << "'";
    }
    os << "\nunset logscale\n";
  }
  return os.str();
}

inline nlohmann::json scalar_json(const std::map<std::string, double>& m) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : m) j[k] = number_or_null(v);
  return j;
}

struct Executed {
  Outcome outcome;
  std::string error;  // exception text, empty on normal completion
  bool usage = false;
};

inline Executed execute(const Job& job, const RunContext& ctx) {
  Executed e;
  try {
    e.outcome = job(ctx);
  } catch (const InvalidArgument& ex) {
    e.error = ex.what();
    e.usage = true;
  } catch (const std::exception& ex) {
    e.error = ex.what();
  }
  return e;
}

inline nlohmann::json summary_head(const ExperimentConfig& cfg, const Options& opt) {
  return {{"name", cfg.name},
          {"experiment", cfg.experiment},
          {"seed", cfg.seed},
          {"tol_scale", opt.tol_scale},
          {"defaults_version", defaults::kVersion}};
}

inline std::string cell_of(const nlohmann::json& v) {
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

inline void set_path(nlohmann::json& root, const std::string& dotted, const nlohmann::json& value) {
  nlohmann::json* node = &root;
  std::size_t start = 0;
  for (;;) {
    const auto dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    if (!node->contains(key)) (*node)[key] = nlohmann::json::object();
    node = &(*node)[key];
    if (!node->is_object()) throw UsageError("lattice key '" + dotted + "' crosses a non-table value");
    start = dot + 1;
  }
}

}  // namespace detail

/// Outcome of one configuration: exit code and one status line per run.
struct RunStatus {
  int code = kExitOk;
  std::vector<std::string> lines;
};

namespace detail {

/// Single experiment: run it and write <stem>*.csv, <stem>.json, <stem>.gp.
inline RunStatus run_single(const ExperimentConfig& cfg, const Prepared& prep, const Options& opt) {
  RunStatus st;
  const RunContext ctx{cfg.seed, opt.tol_scale};
  const auto ex = execute(prep.job, ctx);
  auto summary = summary_head(cfg, opt);
  summary["parameters"] = prep.resolved;
  nlohmann::json files = nlohmann::json::array();
  if (ex.error.empty()) {
    for (const auto& t : ex.outcome.tables) {
      write_file(opt.out_dir / csv_name(cfg.name, t), t.text);
      files.push_back(csv_name(cfg.name, t));
    }
    write_file(opt.out_dir / (cfg.name + ".gp"), plot_script(cfg.name, ex.outcome.tables));
    files.push_back(cfg.name + ".gp");
  }
  summary["constants"] = scalar_json(ex.outcome.constants);
  summary["results"] = ex.outcome.results;
  summary["scalars"] = scalar_json(ex.outcome.scalars);
  summary["failures"] = ex.outcome.failures;
  summary["passed"] = ex.error.empty() && ex.outcome.passed();
  if (!ex.error.empty()) summary["error"] = ex.error;
  summary["files"] = files;
  write_file(opt.out_dir / (cfg.name + ".json"), summary.dump(2) + "\n");
  if (ex.usage) {
    st.code = kExitUsage;
    st.lines.push_back(cfg.name + ": usage error: " + ex.error);
  } else if (!ex.error.empty()) {
    st.code = kExitFailed;
    st.lines.push_back(cfg.name + ": error: " + ex.error);
  } else if (!ex.outcome.passed()) {
    st.code = kExitFailed;
    for (const auto& f : ex.outcome.failures) st.lines.push_back(cfg.name + ": assertion failed: " + f);
  } else {
    st.lines.push_back(cfg.name + ": ok");
  }
  return st;
}

struct SweepPlan {
  std::string base;
  std::vector<std::string> keys;
  std::vector<std::vector<nlohmann::json>> values;
  std::vector<std::string> columns;
  std::vector<std::vector<std::size_t>> points;  // lattice indices, lexicographic
  std::vector<Prepared> prepared;
  nlohmann::json resolved;
};

inline SweepPlan plan_sweep(const ExperimentConfig& cfg) {
  SweepPlan plan;
  Section s(cfg.parameters, "parameters", &plan.resolved);
  std::vector<std::string> bases(experiment_names().begin(), experiment_names().end() - 1);
  plan.base = s.text("base", std::nullopt, bases);
  const nlohmann::json fixed = s.has("fixed") ? s.raw("fixed") : nlohmann::json::object();
  if (!fixed.is_object()) throw field_error(s.field("fixed"), "expected a table");
  const nlohmann::json lattice = s.raw("lattice");
  if (!lattice.is_object() || lattice.empty()) throw field_error(s.field("lattice"), "expected a non-empty table of lists");
  for (const auto& [key, vals] : lattice.items()) {
    if (!vals.is_array() || vals.empty()) throw field_error(s.field("lattice." + key), "expected a non-empty list");
    plan.keys.push_back(key);
    plan.values.emplace_back(vals.begin(), vals.end());
  }
  if (s.has("columns")) {
    const auto cols = s.raw("columns");
    if (!cols.is_array()) throw field_error(s.field("columns"), "expected a list of names");
    for (const auto& c : cols) {
      if (!c.is_string()) throw field_error(s.field("columns"), "expected a list of names");
      plan.columns.push_back(c.get<std::string>());
    }
  }
  s.finish();
  std::vector<std::size_t> idx(plan.keys.size(), 0);
  for (;;) {
    plan.points.push_back(idx);
    std::size_t k = idx.size();
    while (k > 0 && ++idx[k - 1] == plan.values[k - 1].size()) idx[--k] = 0;
    if (k == 0) break;
  }
  for (const auto& pt : plan.points) {
    nlohmann::json params = fixed;
    std::string label;
    for (std::size_t k = 0; k < pt.size(); ++k) {
      set_path(params, plan.keys[k], plan.values[k][pt[k]]);
      label += (k ? ", " : "") + plan.keys[k] + " = " + cell_of(plan.values[k][pt[k]]);
    }
    try {
      plan.prepared.push_back(prepare(plan.base, params, "parameters.fixed"));
    } catch (const UsageError& e) {
      throw UsageError(std::string(e.what()) + " (sweep point " + label + ")");
    }
  }
  return plan;
}

inline RunStatus run_sweep(const ExperimentConfig& cfg, const SweepPlan& plan, const Options& opt) {
  RunStatus st;
  const RunContext ctx{cfg.seed, opt.tol_scale};
  std::vector<Executed> results(plan.points.size());
  parallel_for(results.size(), worker_count(results.size()),
               [&](std::size_t i) { results[i] = execute(plan.prepared[i].job, ctx); });

  std::vector<std::string> columns = plan.columns;
  if (columns.empty()) {
    for (const auto& r : results) {
      if (r.error.empty()) {
        for (const auto& [k, v] : r.outcome.scalars) columns.push_back(k);
        break;
      }
    }
  }
  std::vector<std::string> header = plan.keys;
  header.insert(header.end(), columns.begin(), columns.end());
  header.push_back("error");
  Csv csv(header);
  nlohmann::json points = nlohmann::json::array();
  std::size_t failed = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    std::vector<std::string> cells;
    nlohmann::json point = nlohmann::json::object();
    for (std::size_t k = 0; k < plan.keys.size(); ++k) {
      cells.push_back(cell_of(plan.values[k][plan.points[i][k]]));
      point["lattice"][plan.keys[k]] = plan.values[k][plan.points[i][k]];
    }
    for (const auto& c : columns) {
      const auto it = r.outcome.scalars.find(c);
      cells.push_back(it == r.outcome.scalars.end() ? "nan" : format_double(it->second));
    }
    std::string error = r.error;
    if (error.empty() && !r.outcome.passed()) {
      error = "assertion failed: " + r.outcome.failures.front();
      if (r.outcome.failures.size() > 1) error += " (+" + std::to_string(r.outcome.failures.size() - 1) + " more)";
    }
    for (char& ch : error) {
      if (ch == ',' || ch == '\n' || ch == '"') ch = ';';
    }
    cells.push_back(error);
    csv.row_cells(std::move(cells));
    if (!error.empty()) ++failed;
    point["passed"] = error.empty();
    if (!r.error.empty()) point["error"] = r.error;
    point["failures"] = r.outcome.failures;
    point["constants"] = scalar_json(r.outcome.constants);
    point["results"] = r.outcome.results;
    points.push_back(point);
    if (!r.error.empty()) st.lines.push_back(cfg.name + "[" + std::to_string(i) + "]: error: " + r.error);
    for (const auto& f : r.outcome.failures) st.lines.push_back(cfg.name + "[" + std::to_string(i) + "]: assertion failed: " + f);
  }
  Table table{"", csv.str(), plan.keys.front(), columns, false, false};
  write_file(opt.out_dir / (cfg.name + ".csv"), table.text);
  write_file(opt.out_dir / (cfg.name + ".gp"), plot_script(cfg.name, {table}));
  auto summary = summary_head(cfg, opt);
  summary["parameters"] = plan.resolved;
  summary["points"] = points;
  summary["failed"] = failed;
  summary["passed"] = failed == 0;
  summary["files"] = {cfg.name + ".csv", cfg.name + ".gp"};
  write_file(opt.out_dir / (cfg.name + ".json"), summary.dump(2) + "\n");
  st.code = failed ? kExitFailed : kExitOk;
  if (!failed) st.lines.push_back(cfg.name + ": ok (" + std::to_string(results.size()) + " points)");
  return st;
}

struct PlannedRun {
  ExperimentConfig cfg;
  std::optional<Prepared> single;
  std::optional<SweepPlan> sweep;
};

inline PlannedRun plan_run(const ExperimentConfig& cfg) {
  PlannedRun p{cfg, std::nullopt, std::nullopt};
  if (cfg.experiment == "sweep") {
    p.sweep = plan_sweep(cfg);
  } else {
    p.single = prepare(cfg.experiment, cfg.parameters);
  }
  return p;
}

inline RunStatus execute_planned(const PlannedRun& p, const Options& opt) {
  return p.sweep ? run_sweep(p.cfg, *p.sweep, opt) : run_single(p.cfg, *p.single, opt);
}

}  // namespace detail

/// Loads, validates everything, then executes. `require_sweep` is set by the
/// `sweep` command. Usage errors are thrown before any output is written.
inline RunStatus run_config(ExperimentConfig cfg, const Options& opt, bool require_sweep) {
  if (!(opt.tol_scale > 0.0) || !std::isfinite(opt.tol_scale)) throw UsageError("option --tol-scale: must be a positive number");
  if (require_sweep && cfg.experiment != "sweep") {
    throw field_error("experiment", "the sweep command needs experiment = \"sweep\", got \"" + cfg.experiment + "\"");
  }
  if (opt.seed) {
    cfg.seed = *opt.seed;
    for (auto& r : cfg.runs) r.seed = *opt.seed;
  }
  std::vector<detail::PlannedRun> planned;
  if (cfg.experiment == "suite") {
    for (std::size_t i = 0; i < cfg.runs.size(); ++i) {
      try {
        planned.push_back(detail::plan_run(cfg.runs[i]));
      } catch (const UsageError& e) {
        throw UsageError("runs[" + std::to_string(i) + "] (" + cfg.runs[i].name + "): " + e.what());
      }
    }
  } else {
    planned.push_back(detail::plan_run(cfg));
  }
  worker_count(1);  // rejects a malformed INEQLAB_WORKERS before any work
  std::error_code ec;
  std::filesystem::create_directories(opt.out_dir, ec);
  if (ec) throw UsageError("option --out: cannot create '" + opt.out_dir.string() + "': " + ec.message());

  RunStatus total;
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& p : planned) {
    const auto st = detail::execute_planned(p, opt);
    total.code = std::max(total.code, st.code);
    total.lines.insert(total.lines.end(), st.lines.begin(), st.lines.end());
    runs.push_back({{"name", p.cfg.name}, {"experiment", p.cfg.experiment}, {"exit_code", st.code}});
  }
  if (cfg.experiment == "suite") {
    auto summary = detail::summary_head(cfg, opt);
    summary["runs"] = runs;
    summary["passed"] = total.code == kExitOk;
    detail::write_file(opt.out_dir / (cfg.name + ".json"), summary.dump(2) + "\n");
  }
  return total;
}

}  // namespace ineqlab::cli
