#pragma once

// Deficits of the Sobolev, Hardy-Littlewood-Sobolev, Gagliardo-Nirenberg and
// Euclidean log-Sobolev inequalities; relative entropy and Fisher information
// around the Barenblatt profile; distances and stability quotients.

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ineqlab/error.hpp"
#include "ineqlab/profiles.hpp"
#include "ineqlab/radial.hpp"
#include "ineqlab/report.hpp"

namespace ineqlab {

inline double critical_sobolev_exponent(int d) {
  if (d < 3) throw InvalidArgument("critical Sobolev exponent requires d >= 3");
  return 2.0 * d / (d - 2.0);
}

/// theta = d(p-1) / ((d+2-p(d-2)) p).
inline double gns_theta(int d, double p) {
  require_gns_exponent(p, d, "gns_theta");
  return d * (p - 1.0) / ((d + 2.0 - p * (d - 2.0)) * p);
}

/// phi(s) = sqrt(1+2s) - 1.
inline double phi_refinement(double s) { return std::sqrt(1.0 + 2.0 * s) - 1.0; }

namespace detail {

inline std::map<std::string, std::string> grid_metadata(const RadialGrid& g) {
  return {{"d", std::to_string(g.dim())},
          {"R_max", format_double(g.r_max())},
          {"N", std::to_string(g.intervals())},
          {"grading", format_double(g.grading())}};
}

/// \int phi r^{d-1} dr plus a tail extrapolated from the local power law of
/// the last samples. Meant for nonnegative integrands of unknown decay; a
/// tail contribution below `floor` is treated as roundoff.
inline double integrate_extrapolated(const RadialGrid& g, std::span<const double> phi,
                                     const char* what, double floor = 1e-14) {
  double s = g.integrate(phi);
  const auto r = g.nodes();
  const std::size_t n = r.size() - 1;
  std::size_t j = n;
  while (j > 0 && r[j] > 0.9 * r[n]) --j;
  const double d1 = g.dim() - 1.0;
  const double psi_n = phi[n] * std::pow(r[n], d1);
  const double psi_j = phi[j] * std::pow(r[j], d1);
  if (psi_n > 0.0 && psi_j > 0.0 && j < n) {
    const double e = std::log(psi_j / psi_n) / std::log(r[n] / r[j]);
    if (e > 1.0) {
      s += psi_n * r[n] / (e - 1.0);
    } else if (psi_n * r[n] > std::max(1e-10 * std::abs(s), floor)) {
      throw TailDivergence(std::string(what) + ": integrand decays too slowly");
    }
  }
  return s;
}

/// |S^{d-1}| \int_R^\infty (a r^{-ea} + b r^{-eb})^2 r^{d-1} dr.
inline double two_term_square_tail(const RadialGrid& g, double a, double ea, double b, double eb,
                                   const char* what) {
  const double R = g.r_max();
  const int d = g.dim();
  double t = 0.0;
  if (std::abs(ea - eb) < 1e-12) {
    const double c = a + b;
    if (c != 0.0) t = c * c * power_tail(R, d, 2.0 * ea, what);
  } else {
    if (a != 0.0) t += a * a * power_tail(R, d, 2.0 * ea, what);
    if (b != 0.0) t += b * b * power_tail(R, d, 2.0 * eb, what);
    if (a != 0.0 && b != 0.0) t += 2.0 * a * b * power_tail(R, d, ea + eb, what);
  }
  return g.surface_factor() * t;
}

inline void require_nonnegative(const RadialProfile& f, const char* what) {
  for (double x : f.values()) {
    if (x < 0.0) throw InvalidArgument(std::string(what) + ": profile must be nonnegative");
  }
}

inline void require_dim3(const RadialProfile& f, const char* what) {
  if (f.dim() < 3) throw InvalidArgument(std::string(what) + ": requires d >= 3");
}

inline RadialProfile power(const RadialProfile& f, double p) {
  std::vector<double> v(f.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::pow(std::abs(f[i]), p);
  std::optional<double> decay;
  if (f.decay_exponent()) decay = p * *f.decay_exponent();
  return f.with_values(std::move(v), decay);
}

}  // namespace detail

/// S_d = ||grad g_star||^2 / ||g_star||_{2^*}^2 evaluated on the given grid.
inline double sobolev_constant(const GridPtr& grid) {
  if (grid->dim() < 3) throw InvalidArgument("sobolev_constant: requires d >= 3");
  const auto g = g_star(grid);
  const double n = lp_norm(g, critical_sobolev_exponent(grid->dim()));
  return dirichlet_energy(g) / (n * n);
}

/// C_GNS(p) = ||f_star||_{2p} / (||grad f_star||^theta ||f_star||_{p+1}^{1-theta}).
inline double gns_constant(double p, const GridPtr& grid) {
  const int d = grid->dim();
  const double theta = gns_theta(d, p);
  const auto f = gns_optimizer(p, grid);
  const double grad = std::sqrt(dirichlet_energy(f));
  const double low = theta < 1.0 ? std::pow(lp_norm(f, p + 1.0), 1.0 - theta) : 1.0;
  return lp_norm(f, 2.0 * p) / (std::pow(grad, theta) * low);
}

struct SharpConstants {
  std::optional<double> sobolev;
  double gns = 0.0;
  double theta = 0.0;

  std::map<std::string, double> as_map() const {
    std::map<std::string, double> m{{"C_GNS", gns}, {"theta", theta}};
    if (sobolev) m["S_d"] = *sobolev;
    return m;
  }
};

inline SharpConstants sharp_constants(const GridPtr& grid, double p) {
  SharpConstants k;
  if (grid->dim() >= 3) k.sobolev = sobolev_constant(grid);
  k.theta = gns_theta(grid->dim(), p);
  k.gns = gns_constant(p, grid);
  return k;
}

/// Grid used when only (d, p) are given.
inline GridPtr reference_grid(int d) { return make_grid(d, 1000.0, 4096); }

inline SharpConstants sharp_constants(int d, double p) {
  if (d < 1) throw InvalidArgument("sharp_constants: d must be >= 1");
  require_gns_exponent(p, d, "sharp_constants");
  return sharp_constants(reference_grid(d), p);
}

/// ||grad f||^2 - S_d ||f||_{2^*}^2 together with the Aubin-Talenti distance.
inline InequalityReport sobolev_deficit(const RadialProfile& f) {
  detail::require_dim3(f, "sobolev_deficit");
  const double s = sobolev_constant(f.grid_ptr());
  const double energy = dirichlet_energy(f);
  const double n = lp_norm(f, critical_sobolev_exponent(f.dim()));
  const auto proj = project_to_aubin_talenti(f);
  InequalityReport rep;
  rep.name = "sobolev";
  rep.deficit = energy - s * n * n;
  rep.distance = proj.distance2;
  rep.set_quotient_if_defined(1e-10 * energy);
  rep.constants = {{"S_d", s}, {"a", proj.params.a}, {"c", proj.params.c}};
  rep.metadata = detail::grid_metadata(f.grid());
  rep.metadata["sobolev_constant"] = "S_d (the squared form S_d^2 is read as the same constant)";
  return rep;
}

/// u and u' for -Delta u = g, from the radial Green representation.
struct Potential {
  RadialProfile u;
  RadialProfile du;
};

inline Potential newton_potential(const RadialProfile& g) {
  detail::require_dim3(g, "inverse_laplacian_radial");
  const auto& grid = g.grid();
  const int d = grid.dim();
  const auto r = grid.nodes();
  const std::size_t n = g.size();
  const double R = grid.r_max();

  std::vector<double> sg(n);
  for (std::size_t i = 0; i < n; ++i) sg[i] = r[i] * g[i];
  auto outer = grid.suffix_plain(sg);
  const auto inner = grid.cumulative(g.values());

  double outer_tail = 0.0;
  std::optional<double> u_decay = d - 2.0;
  if (auto sigma = g.decay_exponent()) {
    const double c = g.tail_amplitude();
    if (!(*sigma > 2.0)) {
      throw TailDivergence("inverse_laplacian_radial: g must decay faster than r^{-2}");
    }
    outer_tail = c * std::pow(R, 2.0 - *sigma) / (*sigma - 2.0);
    if (*sigma <= d) u_decay = *sigma - 2.0;
  }

  std::vector<double> u(n), du(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double near = i == 0 ? 0.0 : std::pow(r[i], 2.0 - d) * inner[i];
    u[i] = (near + outer[i] + outer_tail) / (d - 2.0);
    du[i] = i == 0 ? 0.0 : -std::pow(r[i], 1.0 - d) * inner[i];
  }
  return {g.with_values(std::move(u), u_decay), g.with_values(std::move(du), *u_decay + 1.0)};
}

/// (-Delta)^{-1} g for radial g.
inline RadialProfile inverse_laplacian_radial(const RadialProfile& g) {
  return newton_potential(g).u;
}

namespace detail {

/// ||g||_{2d/(d+2)}^2 - S <g, (-Delta)^{-1} g>.
inline double hls_gap(const RadialProfile& g, const RadialProfile& u, double s) {
  const int d = g.dim();
  const double n = lp_norm(g, 2.0 * d / (d + 2.0));
  return n * n - s * inner_product(g, u);
}

}  // namespace detail

inline InequalityReport hls_deficit(const RadialProfile& g) {
  detail::require_dim3(g, "hls_deficit");
  detail::require_nonnegative(g, "hls_deficit");
  const double s = sobolev_constant(g.grid_ptr());
  const auto pot = newton_potential(g);
  InequalityReport rep;
  rep.name = "hls";
  rep.deficit = detail::hls_gap(g, pot.u, s);
  rep.constants = {{"S_d", s}};
  rep.metadata = detail::grid_metadata(g.grid());
  return rep;
}

/// Both sides of the Sobolev/HLS duality for one profile f.
///   lhs = HLS deficit of f^q,  rhs = S^{-1} ||f||^{8/(d-2)} (Sobolev deficit of f),
///   rhs - lhs = S^{-1} \int |A grad f - S grad u|^2  with A = ||f||_{2^*}^{4/(d-2)}.
struct DualityGap {
  double lhs = 0.0;
  double rhs = 0.0;
  double square = 0.0;     // S^{-1} \int |A grad f - S grad u|^2
  double scale = 0.0;      // ||f^q||_{2d/(d+2)}^2
  double residual = 0.0;   // |rhs - lhs - square| / scale
  double phi_bound = 0.0;  // ||f||^{2q} phi(S^{-1} ||f||^{-2} deficit)
  double phi_slack = 0.0;  // phi_bound - lhs
  std::optional<double> ratio;  // lhs / rhs, undefined on equality cases
  InequalityReport report;
};

inline DualityGap duality_gap(const RadialProfile& f) {
  detail::require_dim3(f, "duality_gap_report");
  detail::require_nonnegative(f, "duality_gap_report");
  const int d = f.dim();
  const auto& grid = f.grid();
  const double s = sobolev_constant(f.grid_ptr());
  const double q = (d + 2.0) / (d - 2.0);
  const double norm = lp_norm(f, critical_sobolev_exponent(d));
  const double energy = dirichlet_energy(f);
  const double deficit = energy - s * norm * norm;

  DualityGap out;
  out.report.name = "hls_sobolev_duality";
  out.report.metadata = detail::grid_metadata(grid);
  if (norm == 0.0) {
    out.report.metadata["C_est"] = "undefined";
    return out;
  }

  const auto g = detail::power(f, q);
  const auto pot = newton_potential(g);
  const double amp = std::pow(norm, 4.0 / (d - 2.0));
  out.lhs = detail::hls_gap(g, pot.u, s);
  out.rhs = amp * amp * deficit / s;

  const auto df = differentiate(f);
  std::vector<double> sq(f.size());
  for (std::size_t i = 0; i < sq.size(); ++i) {
    const double e = amp * df[i] - s * pot.du[i];
    sq[i] = e * e;
  }
  double square = grid.surface_factor() * grid.integrate(sq);
  const double df_amp = f.decay_exponent() ? amp * df.tail_amplitude() : 0.0;
  const double df_exp = f.decay_exponent() ? *df.decay_exponent() : 0.0;
  square += detail::two_term_square_tail(grid, df_amp, df_exp, -s * pot.du.tail_amplitude(),
                                         *pot.du.decay_exponent(), "duality_gap_report");
  out.square = square / s;
  out.scale = std::pow(norm, 2.0 * q);
  out.residual = std::abs(out.rhs - out.lhs - out.square) / out.scale;
  out.phi_bound = out.scale * phi_refinement(deficit / (s * norm * norm));
  out.phi_slack = out.phi_bound - out.lhs;
  if (std::abs(out.rhs) > 1e-8 * out.scale) out.ratio = out.lhs / out.rhs;

  auto& rep = out.report;
  rep.deficit = out.rhs - out.lhs;
  rep.constants = {{"S_d", s},          {"L", out.lhs},
                   {"R", out.rhs},      {"square", out.square},
                   {"identity_residual", out.residual},
                   {"phi_bound", out.phi_bound},
                   {"phi_slack", out.phi_slack},
                   {"C_lower", d / (d + 4.0)}};
  if (out.ratio) {
    rep.constants["C_est"] = *out.ratio;
  } else {
    rep.metadata["C_est"] = "undefined";
  }
  return out;
}

inline InequalityReport duality_gap_report(const RadialProfile& f) { return duality_gap(f).report; }

struct MassRescaling {
  RadialProfile v;
  double factor;
};

/// v -> (target / mass(v)) v.
inline MassRescaling rescale_to_mass(const RadialProfile& v, double target) {
  const double m = mass(v);
  if (!(m > 0.0)) throw InvalidArgument("rescale_to_mass: profile has no positive mass");
  return {v.scaled(target / m), target / m};
}

namespace detail {

inline Barenblatt matching_barenblatt(const RadialProfile& v, double m, const char* what) {
  auto b = barenblatt(m, v.grid_ptr());
  const double mv = mass(v);
  if (std::abs(mv - b.mass) > 1e-6 * b.mass) {
    throw MassMismatch(std::string(what) + ": mass " + format_double(mv) +
                       " differs from the Barenblatt mass " + format_double(b.mass) +
                       "; rescale with rescale_to_mass first");
  }
  return b;
}

}  // namespace detail

/// (m-1)^{-1} \int (v^m - B^m - m B^{m-1}(v - B)) dx.
inline double free_energy(const RadialProfile& v, double m) {
  detail::require_nonnegative(v, "free_energy");
  const auto b = detail::matching_barenblatt(v, m, "free_energy");
  std::vector<double> phi(v.size());
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double bi = b.profile[i];
    const double y = v[i] / bi - 1.0;
    // B^m ((1+y)^m - 1 - m y)
    const double val = std::pow(bi, m) * (std::expm1(m * std::log1p(y)) - m * y) / (m - 1.0);
    phi[i] = val < 0.0 && val > -1e-14 ? 0.0 : val;
  }
  return v.grid().surface_factor() * detail::integrate_extrapolated(v.grid(), phi, "free_energy");
}

struct FisherInformation {
  double value = 0.0;
  bool restricted_support = false;  // nodes with v <= 1e-12 max v were skipped
};

/// m/(1-m) \int v |grad(v^{m-1} - B^{m-1})|^2 dx, with B^{m-1} = 1 + r^2.
inline FisherInformation fisher_information_detail(const RadialProfile& v, double m) {
  detail::require_nonnegative(v, "fisher_information");
  detail::matching_barenblatt(v, m, "fisher_information");
  const auto r = v.grid().nodes();
  double vmax = 0.0;
  for (double x : v.values()) vmax = std::max(vmax, x);
  const double floor = 1e-12 * vmax;
  FisherInformation out;
  std::vector<double> p(v.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (v[i] > floor) {
      p[i] = std::pow(v[i], m - 1.0) - (1.0 + r[i] * r[i]);
    } else {
      out.restricted_support = true;
    }
  }
  const auto dp = differentiate(v.with_values(p, std::nullopt));
  std::vector<double> phi(v.size(), 0.0);
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (v[i] > floor) phi[i] = v[i] * dp[i] * dp[i];
  }
  out.value = m / (1.0 - m) * v.grid().surface_factor() *
              detail::integrate_extrapolated(v.grid(), phi, "fisher_information");
  return out;
}

inline double fisher_information(const RadialProfile& v, double m) {
  return fisher_information_detail(v, m).value;
}

struct EntropyPair {
  double free_energy = 0.0;
  double fisher = 0.0;
  std::optional<double> quotient;  // I/F, undefined when F < 1e-14
  bool eep_holds = true;           // quotient >= 4 (1 - 1e-3)
  bool restricted_support = false;
};

inline EntropyPair entropy_pair(const RadialProfile& v, double m) {
  EntropyPair e;
  e.free_energy = free_energy(v, m);
  const auto fi = fisher_information_detail(v, m);
  e.fisher = fi.value;
  e.restricted_support = fi.restricted_support;
  if (e.free_energy >= 1e-14) {
    e.quotient = e.fisher / e.free_energy;
    e.eep_holds = *e.quotient >= 4.0 * (1.0 - 1e-3);
  }
  return e;
}

/// C_GNS(p) ||grad f||^theta ||f||_{p+1}^{1-theta} - ||f||_{2p}.
inline InequalityReport gns_deficit(const RadialProfile& f, double p) {
  const int d = f.dim();
  const double theta = gns_theta(d, p);
  const double c = gns_constant(p, f.grid_ptr());
  const double grad = std::sqrt(dirichlet_energy(f));
  const double low = theta < 1.0 ? std::pow(lp_norm(f, p + 1.0), 1.0 - theta) : 1.0;
  InequalityReport rep;
  rep.name = "gns";
  rep.deficit = c * std::pow(grad, theta) * low - lp_norm(f, 2.0 * p);
  rep.constants = {{"C_GNS", c}, {"theta", theta}, {"p", p}};
  rep.metadata = detail::grid_metadata(f.grid());
  return rep;
}

/// (d/2) log(2 ||grad f||^2 / (pi d e)) - \int f^2 log f^2 for ||f||_2 = 1.
inline InequalityReport euclidean_lsi_deficit(const RadialProfile& f) {
  const int d = f.dim();
  const double n2 = lp_norm(f, 2.0);
  if (std::abs(n2 - 1.0) > 1e-8) {
    throw ConstraintViolation("euclidean_lsi_deficit: ||f||_2 = " + format_double(n2) +
                              " must equal 1 (normalize the input)");
  }
  const double energy = dirichlet_energy(f);
  InequalityReport rep;
  rep.name = "euclidean_lsi";
  rep.deficit = 0.5 * d * std::log(2.0 * energy / (std::numbers::pi * d * std::numbers::e)) -
                entropy_integral(f);
  rep.constants = {{"energy", energy}};
  rep.metadata = detail::grid_metadata(f.grid());
  return rep;
}

struct TailFunctional {
  double value = 0.0;
  bool infinite = false;
  double argmax = 0.0;
};

/// sup_r r^{d(m - m_c)/(1-m)} \int_{|x|>r} v dx.
inline TailFunctional tail_functional(const RadialProfile& v, double m) {
  detail::require_nonnegative(v, "tail_functional");
  if (!(m < 1.0)) throw InvalidArgument("tail_functional: requires m < 1");
  const auto& g = v.grid();
  const int d = g.dim();
  const double kappa = d * (m - critical_mass_exponent(d)) / (1.0 - m);
  double beyond = 0.0;
  TailFunctional out;
  if (auto sigma = v.decay_exponent(); sigma && v.tail_amplitude() != 0.0) {
    if (kappa + d - *sigma > 1e-12) {
      out.infinite = true;
      out.value = std::numeric_limits<double>::infinity();
      return out;
    }
    beyond = v.tail_amplitude() * detail::power_tail(g.r_max(), d, *sigma, "tail_functional");
    if (std::abs(kappa + d - *sigma) <= 1e-12) {
      // r^kappa times the power-law tail mass is constant beyond R_max
      out.value = g.surface_factor() * v.tail_amplitude() / (*sigma - d);
      out.argmax = std::numeric_limits<double>::infinity();
    }
  }
  auto tail = g.suffix(v.values());
  const auto r = g.nodes();
  for (std::size_t i = 1; i < r.size(); ++i) {
    const double val = std::pow(r[i], kappa) * g.surface_factor() * (tail[i] + beyond);
    if (val > out.value) {
      out.value = val;
      out.argmax = r[i];
    }
  }
  return out;
}

/// \int |(p-1) grad f + f^p grad g_star^{1-p}|^2 with p = 2^*/2; since
/// g_star^{1-p} = 1 + r^2 the second gradient is 2r.
inline double thm_main_distance(const RadialProfile& f) {
  detail::require_dim3(f, "thm_main_distance");
  detail::require_nonnegative(f, "thm_main_distance");
  const int d = f.dim();
  const double p = d / (d - 2.0);
  const auto& grid = f.grid();
  const auto r = grid.nodes();
  const auto df = differentiate(f);
  std::vector<double> phi(f.size());
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double e = (p - 1.0) * df[i] + 2.0 * r[i] * std::pow(f[i], p);
    phi[i] = e * e;
  }
  double total = grid.surface_factor() * grid.integrate(phi);
  if (auto sigma = f.decay_exponent()) {
    const double c = f.tail_amplitude();
    total += detail::two_term_square_tail(grid, (p - 1.0) * df.tail_amplitude(), *sigma + 1.0,
                                          2.0 * std::pow(std::abs(c), p), p * *sigma - 1.0,
                                          "thm_main_distance");
  }
  return total;
}

struct LinearizedForms {
  double free_energy = 0.0;  // (m/2) \int w^2 B^{2-m}
  double fisher = 0.0;       // m(1-m) \int |grad w|^2 B
};

inline LinearizedForms linearized_forms(const RadialProfile& w, double m) {
  const auto b = barenblatt(m, w.grid_ptr());
  const auto dw = differentiate(w);
  std::vector<double> f(w.size()), i(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    f[k] = w[k] * w[k] * std::pow(b.profile[k], 2.0 - m);
    i[k] = dw[k] * dw[k] * b.profile[k];
  }
  const auto& g = w.grid();
  return {0.5 * m * g.surface_factor() * detail::integrate_extrapolated(g, f, "linearized_forms"),
          m * (1.0 - m) * g.surface_factor() *
              detail::integrate_extrapolated(g, i, "linearized_forms")};
}

/// Sobolev deficit over the squared Aubin-Talenti distance.
inline InequalityReport be_quotient(const RadialProfile& f) {
  auto rep = sobolev_deficit(f);
  rep.name = "bianchi_egnell";
  if (!rep.quotient) rep.metadata["quotient"] = "undefined";
  return rep;
}

/// Smallest defined quotient over a family (exploratory, never asserted).
inline std::optional<double> min_be_quotient(std::span<const RadialProfile> family) {
  std::optional<double> best;
  for (const auto& f : family) {
    const auto rep = be_quotient(f);
    if (rep.quotient && (!best || *rep.quotient < *best)) best = rep.quotient;
  }
  return best;
}

}  // namespace ineqlab
