#pragma once

#include <cmath>
#include <charconv>
#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace ineqlab {

/// One evaluation of an inequality: deficit, distance to the extremal set,
/// their quotient, the constants used, and provenance.
struct InequalityReport {
  std::string name;
  double deficit = 0.0;
  double distance = 0.0;
  std::optional<double> quotient;
  std::map<std::string, double> constants;
  std::map<std::string, std::string> metadata;

  void set_quotient_if_defined(double tiny = 0.0) {
    if (distance > tiny) {
      quotient = deficit / distance;
    } else {
      quotient.reset();
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["deficit"] = deficit;
    j["distance"] = distance;
    j["quotient"] = quotient ? nlohmann::json(*quotient) : nlohmann::json(nullptr);
    j["constants"] = constants;
    j["metadata"] = metadata;
    return j;
  }
};

inline std::string report_csv_header() { return "name,deficit,distance,quotient"; }

/// Shortest round-trip decimal representation (locale independent).
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::string report_csv_row(const InequalityReport& r) {
  return r.name + "," + format_double(r.deficit) + "," + format_double(r.distance) + "," +
         (r.quotient ? format_double(*r.quotient) : std::string("nan"));
}


}  // namespace ineqlab
