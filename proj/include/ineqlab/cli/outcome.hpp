#pragma once

// Result of one experiment: CSV tables with plot hints, a JSON results block,
// named scalars for sweeps, and the assertion failures.

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ineqlab/cli/config.hpp"
#include "ineqlab/functionals.hpp"
#include "ineqlab/report.hpp"

namespace ineqlab::cli {

struct RunContext {
  std::uint64_t seed = 0;
  double tol_scale = 1.0;
};

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : header_(std::move(header)) {}

  static std::string cell(double x) { return format_double(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(long long x) { return std::to_string(x); }
  static std::string cell(std::size_t x) { return std::to_string(x); }
  static std::string cell(bool x) { return x ? "1" : "0"; }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }

  template <class... Ts>
  void row(const Ts&... xs) {
    rows_.push_back({cell(xs)...});
  }
  void row_cells(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }

  const std::vector<std::string>& header() const { return header_; }

  std::string str() const {
    std::ostringstream os;
    write_line(os, header_);
    for (const auto& r : rows_) write_line(os, r);
    return os.str();
  }

 private:
  static void write_line(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// One CSV file and how to plot it.
struct Table {
  std::string suffix;  // file is <stem>.csv, or <stem>_<suffix>.csv when non-empty
  std::string text;
  std::string x;
  std::vector<std::string> ys;
  bool logx = false;
  bool logy = false;
};

struct Outcome {
  nlohmann::json results = nlohmann::json::object();
  std::map<std::string, double> scalars;
  std::map<std::string, double> constants;
  std::vector<std::string> failures;
  std::vector<Table> tables;

  void require(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  bool passed() const { return failures.empty(); }
};

using Job = std::function<Outcome(const RunContext&)>;

struct Prepared {
  nlohmann::json resolved;
  Job job;
};

/// sharp_constants(d, p) plus d and p. p falls back to min(2, d/(d-2)) when
/// it is absent or outside the admissible GNS range. Results are cached.
inline std::map<std::string, double> constants_for(int d, std::optional<double> p = std::nullopt) {
  const double fallback = std::min(2.0, gns_max_exponent(d));
  const double q = p && *p > 1.0 && *p <= gns_max_exponent(d) ? *p : fallback;
  static std::mutex mu;
  static std::map<std::pair<int, double>, std::map<std::string, double>> cache;
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find({d, q}); it != cache.end()) return it->second;
  }
  auto k = sharp_constants(d, q).as_map();
  k["d"] = d;
  k["p"] = q;
  std::lock_guard lock(mu);
  cache[{d, q}] = k;
  return k;
}

inline void require_positive(const Section& s, const std::string& key, double x) {
  if (!(x > 0.0)) throw field_error(s.field(key), "must be > 0");
}

}  // namespace ineqlab::cli
