#pragma once

// One-dimensional Gaussian measure: log-Sobolev and Beckner-type deficits,
// distance to the exponential family c e^{a x}, and the compact-support
// improvement of the log-Sobolev constant.
//
// Two normalizations are supported:
//   pi-normal  d gamma = e^{-pi x^2} dx          (log-Sobolev prefactor pi)
//   standard   d gamma = (2 pi)^{-1/2} e^{-x^2/2} dx  (prefactor 1/2)

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "ineqlab/detail/numerics.hpp"
#include "ineqlab/error.hpp"
#include "ineqlab/report.hpp"

namespace ineqlab {

enum class GaussianNormalization { PiNormal, Standard };

inline std::string to_string(GaussianNormalization n) {
  return n == GaussianNormalization::PiNormal ? "pi-normal" : "standard";
}

inline GaussianNormalization parse_normalization(const std::string& s) {
  if (s == "pi-normal") return GaussianNormalization::PiNormal;
  if (s == "standard") return GaussianNormalization::Standard;
  throw InvalidArgument("normalization must be \"pi-normal\" or \"standard\", got \"" + s + "\"");
}

class GaussianGrid {
 public:
  /// Uniform nodes on [-L, L] with L = half_width standard deviations.
  static std::shared_ptr<const GaussianGrid> make(GaussianNormalization norm, std::size_t points = 4801,
                                                  double half_width = 12.0) {
    if (points < 65 || points % 2 == 0) throw InvalidArgument("GaussianGrid: points must be odd and >= 65");
    if (!(half_width > 0.0)) throw InvalidArgument("GaussianGrid: half_width must be > 0");
    return std::shared_ptr<const GaussianGrid>(new GaussianGrid(norm, points, half_width));
  }

  GaussianNormalization normalization() const { return norm_; }
  double sigma() const { return norm_ == GaussianNormalization::PiNormal ? 1.0 / std::sqrt(2.0 * std::numbers::pi) : 1.0; }
  /// Sharp log-Sobolev prefactor: pi or 1/2.
  double lsi_prefactor() const { return norm_ == GaussianNormalization::PiNormal ? std::numbers::pi : 0.5; }
  /// Poincare constant 1/variance: 2 pi or 1.
  double poincare_constant() const { return 2.0 * lsi_prefactor(); }
  double spacing() const { return h_; }
  double half_width() const { return xs_.back(); }
  std::size_t size() const { return xs_.size(); }
  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& weights() const { return weights_; }

  double integrate(const std::vector<double>& phi) const {
    if (phi.size() != xs_.size()) throw InvalidArgument("GaussianGrid: sample length does not match the grid");
    double s = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) s += weights_[i] * phi[i];
    return s;
  }

  /// Fourth-order differences, one-sided in the outermost two nodes.
  std::vector<double> derivative(const std::vector<double>& f) const {
    const std::size_t n = f.size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t start = std::clamp<std::size_t>(i, 2, n - 3) - 2;
      const auto& w = stencils_[i < 2 ? i : (i >= n - 2 ? 3 + (i - (n - 2)) : 2)];
      double s = 0.0;
      for (std::size_t k = 0; k < 5; ++k) s += w[k] * f[start + k];
      out[i] = s / h_;
    }
    return out;
  }

 private:
  GaussianGrid(GaussianNormalization norm, std::size_t points, double half_width) : norm_(norm) {
    const double l = half_width * sigma();
    h_ = 2.0 * l / static_cast<double>(points - 1);
    xs_.resize(points);
    weights_.resize(points);
    double total = 0.0;
    for (std::size_t i = 0; i < points; ++i) {
      xs_[i] = -l + h_ * static_cast<double>(i);
      const double z = xs_[i] / sigma();
      weights_[i] = (i == 0 || i + 1 == points ? 0.5 : 1.0) * std::exp(-0.5 * z * z);
      total += weights_[i];
    }
    for (auto& w : weights_) w /= total;
    const std::array<double, 5> offsets{0.0, 1.0, 2.0, 3.0, 4.0};
    for (std::size_t k = 0; k < 5; ++k) {
      const auto w = detail::fornberg_weights(static_cast<double>(k), offsets, 1)[1];
      std::copy_n(w.begin(), 5, stencils_[k].begin());
    }
  }

  GaussianNormalization norm_;
  double h_ = 0.0;
  std::vector<double> xs_;
  std::vector<double> weights_;
  std::array<std::array<double, 5>, 5> stencils_{};
};

using GaussianGridPtr = std::shared_ptr<const GaussianGrid>;

struct GaussianProfile {
  GaussianGridPtr grid;
  std::vector<double> values;

  static GaussianProfile sample(const GaussianGridPtr& grid, const std::function<double(double)>& fn) {
    std::vector<double> v(grid->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(grid->xs()[i]);
    return {grid, std::move(v)};
  }
};

namespace detail {

inline double gaussian_moment(const GaussianProfile& u, const std::function<double(double, double)>& phi) {
  const auto& xs = u.grid->xs();
  std::vector<double> s(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) s[i] = phi(xs[i], u.values[i]);
  return u.grid->integrate(s);
}

inline double gaussian_energy(const GaussianProfile& u) {
  const auto du = u.grid->derivative(u.values);
  std::vector<double> s(du.size());
  for (std::size_t i = 0; i < du.size(); ++i) s[i] = du[i] * du[i];
  return u.grid->integrate(s);
}

inline double gaussian_norm2(const GaussianProfile& u) {
  return gaussian_moment(u, [](double, double v) { return v * v; });
}

/// int u^2 log(u^2 / ||u||^2) d gamma.
inline double gaussian_entropy(const GaussianProfile& u) {
  const double n2 = gaussian_norm2(u);
  if (n2 == 0.0) return 0.0;
  return gaussian_moment(u, [n2](double, double v) {
    const double q = v * v / n2;
    return q > 0.0 ? v * v * std::log(q) : 0.0;
  });
}

}  // namespace detail

/// Squared distance to {c e^{a x}} with the optimal (a, c).
struct LogSobDistance {
  double a = 0.0;
  double c = 0.0;
  double distance2 = 0.0;
};

inline LogSobDistance logsob_distance(const GaussianProfile& u) {
  const auto& xs = u.grid->xs();
  const auto& w = u.grid->weights();
  const double uu = detail::gaussian_norm2(u);
  // moments of e^{a x}: <u, e^{ax}>, <u, x e^{ax}>, ||e^{ax}||^2, <x, e^{2ax}>
  const auto moments = [&](double a) {
    std::array<double, 4> m{};
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double e = std::exp(a * xs[i]);
      m[0] += w[i] * u.values[i] * e;
      m[1] += w[i] * u.values[i] * xs[i] * e;
      m[2] += w[i] * e * e;
      m[3] += w[i] * xs[i] * e * e;
    }
    return m;
  };
  const auto dist = [&](double a) {
    const auto m = moments(a);
    return std::max(0.0, uu - m[0] * m[0] / m[2]);
  };
  const double lo = -5.0, hi = 5.0;
  const auto coarse = detail::scan_then_golden(dist, lo, hi, 201, 1e-12);
  double a = coarse.x;
  // stationarity of <u,e^{ax}>^2 / ||e^{ax}||^2, polished by secant steps
  const auto slope = [&](double s) {
    const auto m = moments(s);
    return m[0] == 0.0 ? 0.0 : m[1] / m[0] - m[3] / m[2];
  };
  double a_prev = a - 1e-4, g_prev = slope(a_prev), g = slope(a);
  for (int it = 0; it < 30 && g != g_prev && std::abs(g) > 0.0; ++it) {
    const double next = a - g * (a - a_prev) / (g - g_prev);
    if (!(std::abs(next - a) < 1e-2) || next < lo || next > hi) break;
    a_prev = a;
    g_prev = g;
    a = next;
    g = slope(a);
    if (std::abs(a - a_prev) < 1e-15) break;
  }
  if (std::abs(slope(a)) > std::abs(slope(coarse.x))) a = coarse.x;
  const double edge = 1e-6 * (hi - lo);
  if (a - lo < edge || hi - a < edge) {
    throw OptimizationFailure("logsob_distance: minimizer over a sits on the bracket [-5, 5]");
  }
  const auto m = moments(a);
  const double c = m[0] / m[2];
  double d2 = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = u.values[i] - c * std::exp(a * xs[i]);
    d2 += w[i] * e * e;
  }
  return {a, c, d2};
}

/// ||u'||^2 - prefactor * int u^2 log(u^2/||u||^2), with the distance to c e^{ax}.
inline InequalityReport gaussian_lsi_deficit(const GaussianProfile& u) {
  const auto& g = *u.grid;
  InequalityReport rep;
  rep.name = "gaussian_lsi";
  const double energy = detail::gaussian_energy(u);
  const double ent = detail::gaussian_entropy(u);
  rep.deficit = energy - g.lsi_prefactor() * ent;
  rep.constants["lsi_prefactor"] = g.lsi_prefactor();
  rep.metadata["normalization"] = to_string(g.normalization());
  if (detail::gaussian_norm2(u) > 0.0) {
    const auto d = logsob_distance(u);
    rep.distance = d.distance2;
    rep.constants["a"] = d.a;
    rep.constants["c"] = d.c;
    rep.set_quotient_if_defined(1e-12 * detail::gaussian_norm2(u));
  }
  return rep;
}

/// (||u||_p^2 - ||u||_2^2) / (p - 2) for p in [1, 2).
inline double gaussian_ep_functional(const GaussianProfile& u, double p) {
  if (!(p >= 1.0 && p < 2.0)) throw InvalidArgument("gaussian_ep_functional: p must lie in [1, 2)");
  const double np = std::pow(detail::gaussian_moment(u, [p](double, double v) { return std::pow(std::abs(v), p); }),
                             2.0 / p);
  return (np - detail::gaussian_norm2(u)) / (p - 2.0);
}

/// ||u'||^2 - poincare_constant * E_p[u], the interpolation between Poincare (p = 1) and log-Sobolev (p -> 2).
inline InequalityReport gaussian_pls_deficit(const GaussianProfile& u, double p) {
  const auto& g = *u.grid;
  InequalityReport rep;
  rep.name = "gaussian_pls";
  rep.deficit = detail::gaussian_energy(u) - g.poincare_constant() * gaussian_ep_functional(u, p);
  rep.constants["p"] = p;
  rep.constants["poincare_constant"] = g.poincare_constant();
  rep.metadata["normalization"] = to_string(g.normalization());
  rep.metadata["distance"] = "not computed";
  return rep;
}

struct ThmMain2Constants {
  double k_star = 0.0;
  double c_star = 0.0;  // C*(K*)
  double c = 0.0;       // improved constant
};

inline double thmmain2_c_star(double k) { return 1.0 + 1.0 / (432.0 * k); }

inline ThmMain2Constants thmmain2_constants(int d, double r) {
  if (d < 1) throw InvalidArgument("thmmain2_constants: d must be >= 1");
  if (!(r > 0.0)) throw InvalidArgument("thmmain2_constants: R must be > 0");
  const double k = std::max(static_cast<double>(d), (d + 1.0) * r * r / (1.0 + r * r));
  const double cs = thmmain2_c_star(k);
  return {k, cs, 1.0 + (cs - 1.0) / (1.0 + r * r * cs)};
}

struct ThmMain2Report {
  bool passed = false;
  double lhs = 0.0;  // ||u'||^2
  double rhs = 0.0;  // (C/2) int u^2 log u^2
  double margin = 0.0;
  ThmMain2Constants constants;
};

/// Compact-support log-Sobolev improvement for normalized, centered u (standard measure).
inline ThmMain2Report thmmain2_verify(const GaussianProfile& u, double r, double tol = 1e-8) {
  const auto& g = *u.grid;
  if (g.normalization() != GaussianNormalization::Standard) {
    throw InvalidArgument("thmmain2_verify: requires the standard Gaussian normalization");
  }
  const double n2 = detail::gaussian_norm2(u);
  const double m1 = detail::gaussian_moment(u, [](double x, double v) { return x * v * v; });
  if (std::abs(n2 - 1.0) > 1e-8) {
    throw ConstraintViolation("thmmain2_verify: int u^2 d gamma = " + format_double(n2) + " differs from 1");
  }
  if (std::abs(m1) > 1e-8) {
    throw ConstraintViolation("thmmain2_verify: int x u^2 d gamma = " + format_double(m1) + " differs from 0");
  }
  double peak = 0.0, outside = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    peak = std::max(peak, std::abs(u.values[i]));
    if (std::abs(g.xs()[i]) > r) outside = std::max(outside, std::abs(u.values[i]));
  }
  if (outside > 1e-12 * peak) {
    throw ConstraintViolation("thmmain2_verify: u does not vanish outside the ball of radius " + format_double(r));
  }
  ThmMain2Report rep;
  rep.constants = thmmain2_constants(1, r);
  rep.lhs = detail::gaussian_energy(u);
  rep.rhs = 0.5 * rep.constants.c *
            detail::gaussian_moment(u, [](double, double v) {
              const double q = v * v;
              return q > 0.0 ? q * std::log(q) : 0.0;
            });
  rep.margin = rep.lhs - rep.rhs;
  rep.passed = rep.margin >= -tol;
  return rep;
}

}  // namespace ineqlab
