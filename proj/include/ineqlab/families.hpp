#pragma once

// Test-profile families shared by the experiment runner and the acceptance
// checks: perturbations of g_star and of the Barenblatt profile, smooth
// compactly supported bumps, and log-spaced sampling helpers.

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "ineqlab/detail/numerics.hpp"
#include "ineqlab/error.hpp"
#include "ineqlab/functionals.hpp"
#include "ineqlab/profiles.hpp"
#include "ineqlab/radial.hpp"

namespace ineqlab {

/// g_star + eps r^2 (1 + r^2)^{-(d+2)/2}.
inline RadialProfile perturbed_g_star(const GridPtr& g, double eps) {
  const int d = g->dim();
  return RadialProfile::sample(
      g,
      [&](double r) { return std::pow(1.0 + r * r, -0.5 * (d - 2)) + eps * r * r * std::pow(1.0 + r * r, -0.5 * (d + 2)); },
      d - 2.0);
}

/// g_star (1 + eps Z_2), Z_2 the degree-2 zonal harmonic in stereographic variables.
inline RadialProfile conformal_mode2(const GridPtr& g, double eps) {
  const int d = g->dim();
  return RadialProfile::sample(
      g,
      [&](double r) {
        const double z = (1.0 - r * r) / (1.0 + r * r);
        return std::pow(1.0 + r * r, -0.5 * (d - 2)) * (1.0 + eps * ((d + 1.0) * z * z - 1.0));
      },
      d - 2.0);
}

/// Normalized Gaussian (lambda^2/pi)^{d/4} e^{-lambda^2 r^2 / 2}.
inline RadialProfile gaussian_profile(const GridPtr& g, double lambda) {
  const int d = g->dim();
  const double c = std::pow(lambda * lambda / std::numbers::pi, 0.25 * d);
  return RadialProfile::sample(g, [&](double r) { return c * std::exp(-0.5 * lambda * lambda * r * r); });
}

/// lambda^{-d} B(r / lambda); same mass as B.
inline RadialProfile dilated_barenblatt(const GridPtr& g, double m, double lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("dilated_barenblatt: lambda must be > 0");
  const int d = g->dim();
  return RadialProfile::sample(
      g, [&](double r) { return std::pow(lambda, -d) * std::pow(1.0 + r * r / (lambda * lambda), 1.0 / (m - 1.0)); },
      2.0 / (1.0 - m));
}

/// B (1 + eps sum_k a_k cos(k s)), s = 2 atan r, rescaled to the mass of B.
inline RadialProfile perturbed_barenblatt(const GridPtr& g, double m, double eps, const std::array<double, 3>& a) {
  const auto b = barenblatt(m, g);
  auto v = RadialProfile::sample(
      g,
      [&](double r) {
        const double s = 2.0 * std::atan(r);
        const double psi = a[0] * std::cos(s) + a[1] * std::cos(2.0 * s) + a[2] * std::cos(3.0 * s);
        return std::pow(1.0 + r * r, 1.0 / (m - 1.0)) * (1.0 + eps * psi);
      },
      2.0 / (1.0 - m));
  return rescale_to_mass(v, b.mass).v;
}

/// exp(-1/(1-y^2)) on |y| < 1, zero outside.
inline double smooth_bump(double y) { return std::abs(y) < 1.0 ? std::exp(-1.0 / (1.0 - y * y)) : 0.0; }

inline double smooth_bump_derivative(double y) {
  return std::abs(y) < 1.0 ? smooth_bump(y) * (-2.0 * y / ((1.0 - y * y) * (1.0 - y * y))) : 0.0;
}

/// n points from lo to hi, geometrically spaced.
inline std::vector<double> logspace(double lo, double hi, int n) {
  if (n < 2 || !(lo > 0.0) || !(hi > lo)) throw InvalidArgument("logspace: needs n >= 2 and 0 < lo < hi");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1));
  return out;
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < x.size(); ++k) {
    lx.push_back(std::log(x[k]));
    ly.push_back(std::log(y[k]));
  }
  return detail::least_squares_slope(lx, ly);
}

}  // namespace ineqlab
