#pragma once

// Radial functions on R^d: graded grids, quadrature against r^{d-1} dr,
// finite-difference derivatives and the weighted norms built on them.
//
// A profile may carry an asymptotic decay exponent sigma, meaning
// f(r) ~ C r^{-sigma} beyond R_max with C fixed by the last sample. Every
// integral below then adds the analytic contribution of that power-law tail.

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ineqlab/detail/numerics.hpp"
#include "ineqlab/error.hpp"

namespace ineqlab {

/// |S^{d-1}| = 2 pi^{d/2} / Gamma(d/2).
inline double sphere_surface(int d) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

class RadialGrid {
 public:
  /// Nodes r_i = R_max (i/N)^grading, i = 0..N.
  static std::shared_ptr<const RadialGrid> make(int d, double r_max, std::size_t n,
                                                double grading = 2.0) {
    if (d < 1) throw InvalidArgument("make_grid: dimension d must be >= 1");
    if (!(r_max > 0.0)) throw InvalidArgument("make_grid: R_max must be > 0");
    if (n < 64) throw InvalidArgument("make_grid: N must be >= 64");
    if (!(grading >= 1.0)) throw InvalidArgument("make_grid: grading must be >= 1");
    return std::shared_ptr<const RadialGrid>(new RadialGrid(d, r_max, n, grading));
  }

  int dim() const { return d_; }
  double r_max() const { return r_max_; }
  double grading() const { return grading_; }
  /// Number of intervals N (there are N+1 nodes).
  std::size_t intervals() const { return nodes_.size() - 1; }
  std::size_t size() const { return nodes_.size(); }
  double surface_factor() const { return surface_; }

  std::span<const double> nodes() const { return nodes_; }
  /// Weights for \int_0^{R_max} phi(r) dr.
  std::span<const double> weights() const { return weights_; }
  /// Weights for \int_0^{R_max} phi(r) r^{d-1} dr.
  std::span<const double> measure_weights() const { return measure_weights_; }

  /// \int_0^{R_max} phi r^{d-1} dr (no surface factor).
  double integrate(std::span<const double> phi) const {
    double s = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) s += measure_weights_[i] * phi[i];
    return s;
  }

  /// \int_{r_j}^{r_{j+1}} phi r^{d-1} dr for every interval j.
  std::vector<double> interval_integrals(std::span<const double> phi) const {
    return pieces(interval_measure_, phi);
  }

  /// Same for the plain measure dr.
  std::vector<double> interval_integrals_plain(std::span<const double> phi) const {
    return pieces(interval_plain_, phi);
  }

  /// c_i = \int_0^{r_i} phi(s) s^{d-1} ds at every node.
  std::vector<double> cumulative(std::span<const double> phi) const {
    return prefix(interval_integrals(phi));
  }

  /// Same as cumulative() for the plain measure dr.
  std::vector<double> cumulative_plain(std::span<const double> phi) const {
    return prefix(interval_integrals_plain(phi));
  }

  /// t_i = \int_{r_i}^{R_max} phi(s) s^{d-1} ds, summed from the outside in.
  std::vector<double> suffix(std::span<const double> phi) const {
    return suffix_of(interval_integrals(phi));
  }

  std::vector<double> suffix_plain(std::span<const double> phi) const {
    return suffix_of(interval_integrals_plain(phi));
  }

  /// Five-point derivative weights at node i (window starts at deriv_start(i)).
  const std::array<double, 5>& derivative_weights(std::size_t i) const { return d1_[i]; }
  const std::array<double, 5>& second_derivative_weights(std::size_t i) const { return d2_[i]; }
  std::size_t derivative_start(std::size_t i) const { return d_start_[i]; }

 private:
  RadialGrid(int d, double r_max, std::size_t n, double grading)
      : d_(d), r_max_(r_max), grading_(grading), surface_(sphere_surface(d)) {
    nodes_.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      nodes_[i] = r_max * std::pow(static_cast<double>(i) / static_cast<double>(n), grading);
    }
    nodes_[n] = r_max;
    build_quadrature();
    build_derivatives();
  }

  std::vector<double> pieces(const std::vector<std::array<double, 4>>& rule,
                             std::span<const double> phi) const {
    std::vector<double> out(rule.size());
    for (std::size_t j = 0; j < rule.size(); ++j) {
      double piece = 0.0;
      for (std::size_t k = 0; k < 4; ++k) piece += rule[j][k] * phi[stencil_[j] + k];
      out[j] = piece;
    }
    return out;
  }

  static std::vector<double> prefix(const std::vector<double>& pieces) {
    std::vector<double> c(pieces.size() + 1, 0.0);
    for (std::size_t j = 0; j < pieces.size(); ++j) c[j + 1] = c[j] + pieces[j];
    return c;
  }

  static std::vector<double> suffix_of(const std::vector<double>& pieces) {
    std::vector<double> t(pieces.size() + 1, 0.0);
    for (std::size_t j = pieces.size(); j-- > 0;) t[j] = t[j + 1] + pieces[j];
    return t;
  }

  // Each interval integrates the cubic through four neighbouring nodes, so
  // the rule is exact for cubic integrands (and for cubic phi against
  // r^{d-1} in the measure weights).
  void build_quadrature() {
    const std::size_t n = nodes_.size() - 1;
    const auto gl = detail::gauss_legendre(static_cast<std::size_t>(std::max(4, d_ / 2 + 4)));
    weights_.assign(n + 1, 0.0);
    measure_weights_.assign(n + 1, 0.0);
    interval_plain_.resize(n);
    interval_measure_.resize(n);
    stencil_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t s = std::min(j == 0 ? 0 : j - 1, n - 3);
      stencil_[j] = s;
      const double a = nodes_[j];
      const double b = nodes_[j + 1];
      std::array<double, 4> plain{};
      std::array<double, 4> meas{};
      for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
        const double x = 0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[q];
        const double w = 0.5 * (b - a) * gl.weights[q];
        const double rw = w * std::pow(x, d_ - 1);
        for (std::size_t k = 0; k < 4; ++k) {
          double basis = 1.0;
          for (std::size_t l = 0; l < 4; ++l) {
            if (l == k) continue;
            basis *= (x - nodes_[s + l]) / (nodes_[s + k] - nodes_[s + l]);
          }
          plain[k] += w * basis;
          meas[k] += rw * basis;
        }
      }
      interval_plain_[j] = plain;
      interval_measure_[j] = meas;
      for (std::size_t k = 0; k < 4; ++k) {
        weights_[s + k] += plain[k];
        measure_weights_[s + k] += meas[k];
      }
    }
  }

  void build_derivatives() {
    const std::size_t n = nodes_.size();
    d1_.resize(n);
    d2_.resize(n);
    d_start_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t s = std::min(i < 2 ? 0 : i - 2, n - 5);
      d_start_[i] = s;
      const auto c = detail::fornberg_weights(nodes_[i], std::span(nodes_).subspan(s, 5), 2);
      for (std::size_t k = 0; k < 5; ++k) {
        d1_[i][k] = c[1][k];
        d2_[i][k] = c[2][k];
      }
    }
  }

  int d_;
  double r_max_;
  double grading_;
  double surface_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> measure_weights_;
  std::vector<std::array<double, 4>> interval_plain_;
  std::vector<std::array<double, 4>> interval_measure_;
  std::vector<std::size_t> stencil_;
  std::vector<std::array<double, 5>> d1_;
  std::vector<std::array<double, 5>> d2_;
  std::vector<std::size_t> d_start_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

inline GridPtr make_grid(int d, double r_max, std::size_t n, double grading = 2.0) {
  return RadialGrid::make(d, r_max, n, grading);
}

/// Samples of a radial function on a shared grid.
class RadialProfile {
 public:
  RadialProfile(GridPtr grid, std::vector<double> values,
                std::optional<double> decay_exponent = std::nullopt)
      : grid_(std::move(grid)), values_(std::move(values)), decay_(decay_exponent) {
    if (!grid_) throw InvalidArgument("RadialProfile: null grid");
    if (values_.size() != grid_->size()) {
      throw InvalidArgument("RadialProfile: value count does not match grid");
    }
    for (double v : values_) {
      if (!std::isfinite(v)) throw InvalidArgument("RadialProfile: non-finite sample");
    }
    if (decay_ && !(*decay_ > 0.0)) {
      throw InvalidArgument("RadialProfile: decay exponent must be > 0");
    }
  }

  /// Samples fn(r) at every node.
  template <class Fn>
  static RadialProfile sample(GridPtr grid, Fn&& fn,
                              std::optional<double> decay_exponent = std::nullopt) {
    std::vector<double> v(grid->size());
    const auto r = grid->nodes();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(r[i]);
    return RadialProfile(std::move(grid), std::move(v), decay_exponent);
  }

  const RadialGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  int dim() const { return grid_->dim(); }
  std::optional<double> decay_exponent() const { return decay_; }

  /// Amplitude C of the tail model C r^{-sigma}, matched at R_max.
  double tail_amplitude() const {
    return decay_ ? values_.back() * std::pow(grid_->r_max(), *decay_) : 0.0;
  }

  RadialProfile scaled(double lambda) const {
    std::vector<double> v(values_);
    for (double& x : v) x *= lambda;
    return RadialProfile(grid_, std::move(v), decay_);
  }

  /// New profile with the same grid; the decay exponent is supplied explicitly.
  RadialProfile with_values(std::vector<double> v, std::optional<double> decay) const {
    return RadialProfile(grid_, std::move(v), decay);
  }

 private:
  GridPtr grid_;
  std::vector<double> values_;
  std::optional<double> decay_;
};

namespace detail {

/// \int_R^\infty r^{-e} r^{d-1} dr, requiring e > d.
inline double power_tail(double r_max, int d, double exponent, const char* what) {
  const double k = exponent - d;
  if (!(k > 0.0)) {
    throw TailDivergence(std::string(what) + ": power-law tail is not integrable");
  }
  return std::pow(r_max, -k) / k;
}

inline void require_same_grid(const RadialProfile& a, const RadialProfile& b) {
  if (a.grid_ptr() != b.grid_ptr()) throw InvalidArgument("profiles live on different grids");
}

}  // namespace detail

/// Fourth-order finite-difference derivative with f'(0) = 0.
inline RadialProfile differentiate(const RadialProfile& f) {
  const auto& g = f.grid();
  const auto v = f.values();
  std::vector<double> out(v.size());
  for (std::size_t i = 1; i < v.size(); ++i) {
    const auto& w = g.derivative_weights(i);
    const std::size_t s = g.derivative_start(i);
    double acc = 0.0;
    for (std::size_t k = 0; k < 5; ++k) acc += w[k] * v[s + k];
    out[i] = acc;
  }
  out[0] = 0.0;
  std::optional<double> decay;
  if (f.decay_exponent()) decay = *f.decay_exponent() + 1.0;
  return f.with_values(std::move(out), decay);
}

/// Radial Laplacian f'' + (d-1) f'/r, with the limit d f''(0) at the origin.
inline RadialProfile radial_laplacian(const RadialProfile& f) {
  const auto& g = f.grid();
  const auto v = f.values();
  const auto r = g.nodes();
  const int d = g.dim();
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& w1 = g.derivative_weights(i);
    const auto& w2 = g.second_derivative_weights(i);
    const std::size_t s = g.derivative_start(i);
    double f1 = 0.0, f2 = 0.0;
    for (std::size_t k = 0; k < 5; ++k) {
      f1 += w1[k] * v[s + k];
      f2 += w2[k] * v[s + k];
    }
    out[i] = i == 0 ? d * f2 : f2 + (d - 1) * f1 / r[i];
  }
  std::optional<double> decay;
  if (f.decay_exponent()) decay = *f.decay_exponent() + 2.0;
  return f.with_values(std::move(out), decay);
}

/// |S^{d-1}| \int phi r^{d-1} dr plus the power-law tail coef * r^{-exponent}.
inline double integrate_with_tail(const RadialGrid& g, std::span<const double> phi,
                                  double tail_coef = 0.0, double tail_exponent = 0.0,
                                  const char* what = "integral") {
  double s = g.integrate(phi);
  if (tail_coef != 0.0) s += tail_coef * detail::power_tail(g.r_max(), g.dim(), tail_exponent, what);
  return g.surface_factor() * s;
}

/// \int |f|^p dx (tail-corrected).
inline double lp_integral(const RadialProfile& f, double p) {
  if (!(p > 0.0)) throw InvalidArgument("lp_norm: p must be > 0");
  std::vector<double> phi(f.size());
  for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = std::pow(std::abs(f[i]), p);
  if (auto sigma = f.decay_exponent()) {
    const double c = std::abs(f.tail_amplitude());
    if (c == 0.0) return integrate_with_tail(f.grid(), phi);
    return integrate_with_tail(f.grid(), phi, std::pow(c, p), p * *sigma, "lp_norm");
  }
  return integrate_with_tail(f.grid(), phi);
}

/// (|S^{d-1}| \int |f|^p r^{d-1} dr)^{1/p}, tail-corrected when f decays.
inline double lp_norm(const RadialProfile& f, double p) {
  return std::pow(lp_integral(f, p), 1.0 / p);
}

/// \int f g dx, tail-corrected when both carry decay exponents.
inline double inner_product(const RadialProfile& f, const RadialProfile& h) {
  detail::require_same_grid(f, h);
  std::vector<double> phi(f.size());
  for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = f[i] * h[i];
  if (f.decay_exponent() && h.decay_exponent()) {
    return integrate_with_tail(f.grid(), phi, f.tail_amplitude() * h.tail_amplitude(),
                               *f.decay_exponent() + *h.decay_exponent(), "inner_product");
  }
  return integrate_with_tail(f.grid(), phi);
}

/// \int grad f . grad h dx, tail-corrected when both decay.
inline double gradient_inner_product(const RadialProfile& f, const RadialProfile& h) {
  detail::require_same_grid(f, h);
  const auto df = differentiate(f);
  const auto dh = differentiate(h);
  std::vector<double> phi(f.size());
  for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = df[i] * dh[i];
  if (f.decay_exponent() && h.decay_exponent()) {
    const double sf = *f.decay_exponent();
    const double sh = *h.decay_exponent();
    return integrate_with_tail(f.grid(), phi, sf * sh * f.tail_amplitude() * h.tail_amplitude(),
                               sf + sh + 2.0, "dirichlet_energy");
  }
  return integrate_with_tail(f.grid(), phi);
}

/// ||grad f||_2^2.
inline double dirichlet_energy(const RadialProfile& f) { return gradient_inner_product(f, f); }

/// \int f^2 log f^2 dx with s log s -> 0 at s = 0.
inline double entropy_integral(const RadialProfile& f) {
  const auto& g = f.grid();
  std::vector<double> phi(f.size());
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double s = f[i] * f[i];
    phi[i] = s > 0.0 ? s * std::log(s) : 0.0;
  }
  double total = g.integrate(phi);
  if (auto sigma = f.decay_exponent(); sigma && f.tail_amplitude() != 0.0) {
    const double c2 = f.tail_amplitude() * f.tail_amplitude();
    const double k = 2.0 * *sigma - g.dim();
    if (!(k > 0.0)) throw TailDivergence("entropy_integral: tail is not integrable");
    const double rk = std::pow(g.r_max(), -k);
    const double log_r = std::log(g.r_max());
    total += c2 * (std::log(c2) * rk / k - 2.0 * *sigma * rk * (log_r / k + 1.0 / (k * k)));
  }
  return g.surface_factor() * total;
}

/// Mass \int f dx (tail-corrected).
inline double mass(const RadialProfile& f) {
  const auto& g = f.grid();
  if (auto sigma = f.decay_exponent(); sigma && f.tail_amplitude() != 0.0) {
    return integrate_with_tail(g, f.values(), f.tail_amplitude(), *sigma, "mass");
  }
  return integrate_with_tail(g, f.values());
}

}  // namespace ineqlab
