#pragma once

// Closed-form reference families: Aubin-Talenti functions, Barenblatt
// profiles, Gagliardo-Nirenberg optimizers, the separable Yamabe solution,
// and the projection of a radial function onto the Aubin-Talenti slice b = 0.

#include <cmath>
#include <string>

#include "ineqlab/detail/numerics.hpp"
#include "ineqlab/error.hpp"
#include "ineqlab/radial.hpp"

namespace ineqlab {

struct AubinTalentiParams {
  double a = 1.0;  // scale
  double c = 1.0;  // amplitude
};

/// c (a + r^2)^{-(d-2)/2}; the translation b is fixed to 0.
inline RadialProfile aubin_talenti(const AubinTalentiParams& params, const GridPtr& grid) {
  const int d = grid->dim();
  if (d < 3) throw InvalidArgument("aubin_talenti: requires d >= 3");
  if (!(params.a > 0.0)) throw InvalidArgument("aubin_talenti: scale a must be > 0");
  const double e = -0.5 * (d - 2);
  return RadialProfile::sample(
      grid, [&](double r) { return params.c * std::pow(params.a + r * r, e); }, d - 2.0);
}

/// g_star = (1 + r^2)^{-(d-2)/2}.
inline RadialProfile g_star(const GridPtr& grid) { return aubin_talenti({1.0, 1.0}, grid); }

/// m_c = (d-2)/d: the Barenblatt profile has finite mass iff m > m_c.
inline double critical_mass_exponent(int d) { return (d - 2.0) / d; }

/// m_1 = (d-1)/d.
inline double first_exponent(int d) { return (d - 1.0) / d; }

struct Barenblatt {
  RadialProfile profile;
  double m;
  double mass;
};

/// (1 + r^2)^{1/(m-1)} with its mass.
inline Barenblatt barenblatt(double m, const GridPtr& grid) {
  const int d = grid->dim();
  const double mc = critical_mass_exponent(d);
  if (!(m > mc && m < 1.0)) {
    throw InvalidArgument("barenblatt: m = " + std::to_string(m) + " must lie in (m_c, 1) with m_c = (d-2)/d = " +
                          std::to_string(mc));
  }
  const double e = 1.0 / (m - 1.0);
  auto profile = RadialProfile::sample(
      grid, [e](double r) { return std::pow(1.0 + r * r, e); }, 2.0 / (1.0 - m));
  const double total = mass(profile);
  return {std::move(profile), m, total};
}

/// Largest admissible GNS exponent: 2^* / 2 = d/(d-2) for d >= 3, none below.
inline double gns_max_exponent(int d) {
  return d >= 3 ? d / (d - 2.0) : std::numeric_limits<double>::infinity();
}

inline void require_gns_exponent(double p, int d, const char* what) {
  if (!(p > 1.0 && p <= gns_max_exponent(d))) {
    throw InvalidArgument(std::string(what) + ": p = " + std::to_string(p) +
                          " outside the admissible range (1, 2^*/2]");
  }
}

/// f_star = (1 + r^2)^{-1/(p-1)}, so that f_star^{2p} is the Barenblatt
/// profile with m = (p+1)/(2p).
inline RadialProfile gns_optimizer(double p, const GridPtr& grid) {
  require_gns_exponent(p, grid->dim(), "gns_optimizer");
  const double e = -1.0 / (p - 1.0);
  auto f = RadialProfile::sample(grid, [e](double r) { return std::pow(1.0 + r * r, e); },
                                 2.0 / (p - 1.0));
  const double mb = 1.0 / ((p + 1.0) / (2.0 * p) - 1.0);
  const auto r = grid->nodes();
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double lhs = std::pow(f[i], 2.0 * p);
    const double rhs = std::pow(1.0 + r[i] * r[i], mb);
    if (std::abs(lhs - rhs) > 1e-12 * rhs) {
      throw std::logic_error("gns_optimizer: f^{2p} does not match the Barenblatt profile");
    }
  }
  return f;
}

/// Yamabe exponent m = (d-2)/(d+2).
inline double yamabe_exponent(int d) { return (d - 2.0) / (d + 2.0); }

struct SeparableConstants {
  double alpha;
  double c;
};

/// alpha = (d+2)/4 and c = (4 d (d-2)/(d+2))^alpha.
inline SeparableConstants yamabe_separable_constants(int d) {
  const double alpha = 0.25 * (d + 2);
  return {alpha, std::pow(4.0 * d * (d - 2.0) / (d + 2.0), alpha)};
}

/// c (T-t)^alpha g_star^{(d+2)/(d-2)}: separable solution vanishing at t = T.
inline RadialProfile yamabe_separable(double extinction_time, double t, const GridPtr& grid) {
  const int d = grid->dim();
  if (d < 3) throw InvalidArgument("yamabe_separable: requires d >= 3");
  if (!(t < extinction_time) || t < 0.0) {
    throw InvalidArgument("yamabe_separable: requires 0 <= t < T");
  }
  const auto k = yamabe_separable_constants(d);
  const double amp = k.c * std::pow(extinction_time - t, k.alpha);
  const double e = -0.5 * (d + 2);
  return RadialProfile::sample(
      grid, [&](double r) { return amp * std::pow(1.0 + r * r, e); }, d + 2.0);
}

struct Projection {
  AubinTalentiParams params;
  double distance2 = 0.0;
  double bracket_lo = 1e-4;
  double bracket_hi = 1e4;
};

/// argmin over (a, c) of ||grad(f - c g_{a,0})||_2^2. The amplitude is the
/// explicit quadratic optimum; log a is searched by a coarse scan followed
/// by golden-section refinement. Ties resolve to the smallest a.
inline Projection project_to_aubin_talenti(const RadialProfile& f, double a_lo = 1e-4,
                                           double a_hi = 1e4) {
  const auto& grid = f.grid_ptr();
  if (grid->dim() < 3) throw InvalidArgument("project_to_aubin_talenti: requires d >= 3");
  const double energy = dirichlet_energy(f);
  if (!std::isfinite(energy)) throw InvalidArgument("project_to_aubin_talenti: infinite energy");
  Projection out;
  out.bracket_lo = a_lo;
  out.bracket_hi = a_hi;
  if (energy == 0.0) {
    out.params = {1.0, 0.0};
    return out;
  }
  auto fit = [&](double log_a) {
    const auto g = aubin_talenti({std::exp(log_a), 1.0}, grid);
    const double cross = gradient_inner_product(f, g);
    const double eg = dirichlet_energy(g);
    return std::pair{cross / eg, energy - cross * cross / eg};
  };
  const auto best = detail::scan_then_golden([&](double x) { return fit(x).second; },
                                             std::log(a_lo), std::log(a_hi), 97, 1e-10);
  const auto [c, dist] = fit(best.x);
  out.params = {std::exp(best.x), c};
  out.distance2 = std::max(0.0, dist);
  return out;
}

}  // namespace ineqlab
