#pragma once

// Experiment configuration: TOML (JSON accepted as a fallback) parsed into a
// JSON tree, and a typed, path-aware reader that records every value it
// resolves and rejects unknown keys.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <toml.hpp>

#include "ineqlab/report.hpp"

namespace ineqlab::cli {

using nlohmann::json;

/// Invalid command line or configuration; the message names the field.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline UsageError field_error(const std::string& field, const std::string& what) {
  return UsageError("field '" + field + "': " + what);
}

inline json parse_toml(const std::string& text, const std::string& source) {
  toml::table table;
  try {
    table = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << e.description() << " at line " << e.source().begin.line;
    throw UsageError(source + ": " + os.str());
  }
  std::ostringstream os;
  os << toml::json_formatter{table};
  return json::parse(os.str());
}

/// `.json` files are read as JSON, everything else as TOML; a TOML parse
/// failure on a file that is valid JSON falls back to JSON.
inline json load_config_tree(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  json tree;
  if (path.extension() == ".json") {
    try {
      tree = json::parse(text);
    } catch (const json::parse_error& e) {
      throw UsageError(path.string() + ": " + e.what());
    }
  } else {
    try {
      tree = parse_toml(text, path.string());
    } catch (const UsageError&) {
      tree = json::parse(text, nullptr, false);
      if (tree.is_discarded()) throw;
    }
  }
  if (!tree.is_object()) throw UsageError(path.string() + ": top level must be a table");
  return tree;
}

/// Typed view of one table. Every value read, including defaults, is copied
/// into `resolved`; finish() rejects keys that were never read.
class Section {
 public:
  Section(json node, std::string path, json* resolved) : node_(std::move(node)), path_(std::move(path)), out_(resolved) {
    if (node_.is_null()) node_ = json::object();
    if (!node_.is_object()) throw UsageError("field '" + path_ + "': expected a table");
    if (out_->is_null()) *out_ = json::object();
  }

  const std::string& path() const { return path_; }
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return node_.contains(key); }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const json* v = lookup(key, fallback.has_value());
    const double x = v ? as_number(*v, key) : *fallback;
    (*out_)[key] = x;
    return x;
  }

  long long integer(const std::string& key, std::optional<long long> fallback = std::nullopt) {
    const json* v = lookup(key, fallback.has_value());
    long long x;
    if (!v) {
      x = *fallback;
    } else if (v->is_number_integer()) {
      x = v->get<long long>();
    } else if (v->is_number_float() && std::floor(v->get<double>()) == v->get<double>() &&
               std::abs(v->get<double>()) < 9e15) {
      x = static_cast<long long>(v->get<double>());
    } else {
      throw field_error(field(key), "expected an integer");
    }
    (*out_)[key] = x;
    return x;
  }

  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt,
                   const std::vector<std::string>& allowed = {}) {
    const json* v = lookup(key, fallback.has_value());
    if (v && !v->is_string()) throw field_error(field(key), "expected a string");
    std::string s = v ? v->get<std::string>() : *fallback;
    if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : " | ") + a;
      throw field_error(field(key), "unknown value '" + s + "' (" + list + ")");
    }
    (*out_)[key] = s;
    return s;
  }

  bool flag(const std::string& key, bool fallback) {
    const json* v = lookup(key, true);
    if (v && !v->is_boolean()) throw field_error(field(key), "expected true or false");
    const bool b = v ? v->get<bool>() : fallback;
    (*out_)[key] = b;
    return b;
  }

  /// A number or a non-empty array of numbers.
  std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt) {
    const json* v = lookup(key, fallback.has_value());
    std::vector<double> xs;
    if (!v) {
      xs = *fallback;
    } else if (v->is_array()) {
      if (v->empty()) throw field_error(field(key), "expected a non-empty list");
      for (const auto& e : *v) xs.push_back(as_number(e, key));
    } else {
      xs.push_back(as_number(*v, key));
    }
    (*out_)[key] = xs;
    return xs;
  }

  std::vector<long long> integers(const std::string& key, std::optional<std::vector<long long>> fallback = std::nullopt) {
    const json* v = lookup(key, fallback.has_value());
    std::vector<long long> xs;
    if (!v) {
      xs = *fallback;
    } else {
      const json arr = v->is_array() ? *v : json::array({*v});
      if (arr.empty()) throw field_error(field(key), "expected a non-empty list");
      for (const auto& e : arr) {
        if (!e.is_number_integer()) throw field_error(field(key), "expected integers");
        xs.push_back(e.get<long long>());
      }
    }
    (*out_)[key] = xs;
    return xs;
  }

  /// Sub-table; a missing key yields an empty table.
  Section child(const std::string& key) {
    seen_.insert(key);
    json& slot = (*out_)[key];
    return Section(node_.contains(key) ? node_.at(key) : json::object(), field(key), &slot);
  }

  /// Raw value, copied verbatim into the resolved tree.
  json raw(const std::string& key) {
    const json* v = lookup(key, false);
    (*out_)[key] = *v;
    return *v;
  }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) throw field_error(field(key), "unknown parameter");
    }
  }

 private:
  const json* lookup(const std::string& key, bool optional) {
    seen_.insert(key);
    if (node_.contains(key)) return &node_.at(key);
    if (!optional) throw field_error(field(key), "missing required parameter");
    return nullptr;
  }

  double as_number(const json& v, const std::string& key) const {
    if (!v.is_number()) throw field_error(field(key), "expected a number");
    return v.get<double>();
  }

  json node_;
  std::string path_;
  json* out_;
  std::set<std::string> seen_;
};

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"yamabe", "rfd", "spectrum", "deficit", "sphere", "gaussian", "sweep"};
  return names;
}

struct ExperimentConfig {
  std::string experiment;
  std::string name;       // output stem
  std::uint64_t seed = 0;
  json parameters = json::object();
  std::vector<ExperimentConfig> runs;  // suite entries
};

namespace detail {

inline ExperimentConfig parse_experiment(const json& tree, const std::string& path, bool allow_suite,
                                         std::optional<std::uint64_t> inherited_seed) {
  json resolved;
  Section top(tree, path, &resolved);
  ExperimentConfig cfg;
  std::vector<std::string> allowed = experiment_names();
  if (allow_suite) allowed.push_back("suite");
  cfg.experiment = top.text("experiment", std::nullopt, allowed);
  cfg.name = top.text("name", cfg.experiment);
  if (cfg.name.empty() || cfg.name.find_first_of("/\\") != std::string::npos) {
    throw field_error(top.field("name"), "must be a non-empty file stem");
  }
  const long long seed = top.integer("seed", inherited_seed ? static_cast<long long>(*inherited_seed) : 0);
  if (seed < 0) throw field_error(top.field("seed"), "must be >= 0");
  cfg.seed = static_cast<std::uint64_t>(seed);
  top.text("description", "");
  if (cfg.experiment == "suite") {
    const json runs = top.raw("runs");
    if (!runs.is_array() || runs.empty()) throw field_error(top.field("runs"), "expected a non-empty list of tables");
    std::set<std::string> names;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      auto sub = parse_experiment(runs[i], top.field("runs[" + std::to_string(i) + "]"), false, cfg.seed);
      if (!names.insert(sub.name).second) {
        throw field_error(top.field("runs[" + std::to_string(i) + "].name"), "duplicate run name '" + sub.name + "'");
      }
      cfg.runs.push_back(std::move(sub));
    }
  } else {
    cfg.parameters = tree.contains("parameters") ? tree.at("parameters") : json::object();
    if (!cfg.parameters.is_object()) throw field_error(top.field("parameters"), "expected a table");
    if (top.has("parameters")) top.raw("parameters");
  }
  top.finish();
  return cfg;
}

}  // namespace detail

inline ExperimentConfig parse_config(const json& tree) { return detail::parse_experiment(tree, "", true, std::nullopt); }

inline ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config(load_config_tree(path)); }

}  // namespace ineqlab::cli
