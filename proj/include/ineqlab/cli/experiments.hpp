#pragma once

// The six experiment kinds. Each prepare_* reads and validates its whole
// parameter table before returning the job that runs it.

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ineqlab/cli/config.hpp"
#include "ineqlab/cli/outcome.hpp"
#include "ineqlab/defaults.hpp"
#include "ineqlab/families.hpp"
#include "ineqlab/flows.hpp"
#include "ineqlab/functionals.hpp"
#include "ineqlab/gaussian.hpp"
#include "ineqlab/spectrum.hpp"
#include "ineqlab/sphere.hpp"

namespace ineqlab::cli {

namespace detail {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline nlohmann::json number_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

inline std::string fmt(double x) { return format_double(x); }

struct GridSpec {
  double r_max;
  std::size_t n;
};

inline int parse_dim(Section& s, int fallback, int min) {
  const long long d = s.integer("d", fallback);
  if (d < min || d > 4096) throw field_error(s.field("d"), "must lie in [" + std::to_string(min) + ", 4096]");
  return static_cast<int>(d);
}

inline std::size_t parse_count(Section& s, const std::string& key, long long fallback, long long min) {
  const long long n = s.integer(key, fallback);
  if (n < min || n > 10'000'000) throw field_error(s.field(key), "must lie in [" + std::to_string(min) + ", 1e7]");
  return static_cast<std::size_t>(n);
}

inline GridSpec parse_grid(Section& parent, double r_max, std::size_t n) {
  auto g = parent.child("grid");
  GridSpec out{g.number("r_max", r_max), 0};
  require_positive(g, "r_max", out.r_max);
  out.n = parse_count(g, "n", static_cast<long long>(n), 16);
  g.finish();
  return out;
}

inline FlowConfig parse_flow(Section& parent, double m, double dt, double t_end, Scheme scheme, int record_every) {
  auto f = parent.child("flow");
  FlowConfig c;
  c.m = m;
  c.dt = f.number("dt", dt);
  require_positive(f, "dt", c.dt);
  c.t_end = f.number("t_end", t_end);
  require_positive(f, "t_end", c.t_end);
  c.scheme = parse_scheme(f.text("scheme", to_string(scheme), {"semi-implicit", "implicit-newton"}));
  c.record_every = static_cast<int>(parse_count(f, "record_every", record_every, 1));
  f.finish();
  return c;
}

inline std::string trace_csv(const FlowTrace& tr) {
  std::ostringstream os;
  tr.write_csv(os);
  return os.str();
}

/// First-order least-squares slope of -log F over samples with F above the floors.
inline std::pair<double, std::size_t> late_rate(const FlowTrace& tr, double t0, double t1, double floor) {
  std::vector<double> t, y;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    if (tr.times[k] >= t0 && tr.times[k] <= t1 && tr.free_energy[k] > floor) {
      t.push_back(tr.times[k]);
      y.push_back(-std::log(tr.free_energy[k]));
    }
  }
  if (t.size() < 5) return {kNaN, t.size()};
  return {ineqlab::detail::least_squares_slope(t, y), t.size()};
}

inline std::optional<double> gns_p_from_m(double m) {
  if (m > 0.5 && m < 1.0) return 1.0 / (2.0 * m - 1.0);
  return std::nullopt;
}

}  // namespace detail

inline Job prepare_yamabe(Section& s) {
  namespace D = defaults::yamabe;
  using detail::fmt;
  const int d = detail::parse_dim(s, D::d, 3);
  const auto grid = detail::parse_grid(s, D::r_max, D::n);
  const auto flow = detail::parse_flow(s, yamabe_exponent(d), D::dt, D::t_end, Scheme::ImplicitNewton, D::record_every);
  auto init = s.child("initial");
  const std::string kind = init.text("kind", "separable", {"separable", "power", "bumped-separable"});
  double extinction = 1.0, amplitude = 1.0, exponent = 0.0;
  if (kind != "power") {
    extinction = init.number("extinction_time", 1.0);
    require_positive(init, "extinction_time", extinction);
  }
  if (kind == "power") {
    amplitude = init.number("amplitude", 1.0);
    require_positive(init, "amplitude", amplitude);
    exponent = init.number("exponent", 3.0);
    if (!(exponent > 0.25 * (d + 2))) throw field_error(init.field("exponent"), "must exceed (d+2)/4 = " + fmt(0.25 * (d + 2)));
  }
  if (kind == "bumped-separable") {
    amplitude = init.number("amplitude", 0.1);
    if (!(amplitude > -1.0)) throw field_error(init.field("amplitude"), "must be > -1");
  }
  init.finish();
  auto checks = s.child("checks");
  const double h_tol = checks.number("h_tolerance", D::h_tolerance);
  require_positive(checks, "h_tolerance", h_tol);
  const double ext_tol = checks.number("extinction_rel_tol", D::extinction_rel_tol);
  require_positive(checks, "extinction_rel_tol", ext_tol);
  checks.finish();

  return [=](const RunContext& ctx) {
    Outcome out;
    const auto g = make_grid(d, grid.r_max, grid.n);
    RadialProfile v0 = yamabe_separable(extinction, 0.0, g);
    if (kind == "power") {
      v0 = RadialProfile::sample(g, [&](double r) { return amplitude * std::pow(1.0 + r * r, -exponent); }, 2.0 * exponent);
    } else if (kind == "bumped-separable") {
      const auto k = yamabe_separable_constants(d);
      const double c = k.c * std::pow(extinction, k.alpha);
      v0 = RadialProfile::sample(
          g, [&](double r) { return c * std::pow(1.0 + r * r, -0.5 * (d + 2)) * (1.0 + amplitude * std::exp(-r * r)); },
          d + 2.0);
    }
    const auto tr = run_yamabe(v0, flow);
    double worst = 0.0;
    for (std::size_t k = 1; k < tr.size(); ++k) {
      worst = std::max(worst, (tr.H[k - 1] - tr.H[k]) / std::pow(tr.J[k - 1], (d + 2.0) / d));
    }
    out.require(worst <= h_tol * ctx.tol_scale,
                "H decreased by " + fmt(worst) + " J^{(d+2)/d} > " + fmt(h_tol * ctx.tol_scale));
    double rel = detail::kNaN;
    if (kind == "separable") {
      if (!tr.extinct) {
        out.failures.push_back("no extinction before t_end = " + fmt(flow.t_end));
      } else {
        rel = std::abs(tr.extinction_time - extinction) / extinction;
        out.require(rel <= ext_tol * ctx.tol_scale, "extinction time " + fmt(tr.extinction_time) + " differs from T = " +
                                                        fmt(extinction) + " by " + fmt(rel) + " relative");
      }
    }
    out.tables.push_back({"", detail::trace_csv(tr), "t", {"H"}, false, false});
    out.results = {{"initial", kind},
                   {"extinct", tr.extinct},
                   {"extinction_time", detail::number_or_null(tr.extinction_time)},
                   {"extinction_rel_error", detail::number_or_null(rel)},
                   {"h_worst_drop", worst},
                   {"records", tr.size()},
                   {"rejections", tr.rejections}};
    out.scalars = {{"h_worst_drop", worst},
                   {"extinction_time", tr.extinct ? tr.extinction_time : detail::kNaN},
                   {"H_initial", tr.H.front()},
                   {"H_final", tr.H.back()}};
    out.constants = constants_for(d, d / (d - 2.0));
    return out;
  };
}

inline Job prepare_rfd(Section& s) {
  namespace D = defaults::rfd;
  using detail::fmt;
  const int d = detail::parse_dim(s, D::d, 1);
  const double m = s.number("m", D::m);
  const double mc = critical_mass_exponent(d);
  if (!(m > mc && m < 1.0)) {
    throw field_error(s.field("m"), "m = " + fmt(m) + " must satisfy (d-2)/d < m < 1; the bound (d-2)/d is " + fmt(mc) +
                                        " for d = " + std::to_string(d));
  }
  const auto grid = detail::parse_grid(s, m < D::m_switch ? D::r_max_slow : D::r_max_fast, D::n);
  const auto flow = detail::parse_flow(s, m, D::dt, D::t_end, Scheme::SemiImplicit, D::record_every);
  auto init = s.child("initial");
  const std::string kind = init.text("kind", "dilated", {"barenblatt", "dilated", "perturbed"});
  double lambda = 1.0, eps = 0.0;
  std::optional<std::array<double, 3>> coeffs;
  if (kind == "dilated") {
    lambda = init.number("lambda", 1.2);
    require_positive(init, "lambda", lambda);
  }
  if (kind == "perturbed") {
    eps = init.number("eps", 0.05);
    if (init.has("coefficients")) {
      const auto a = init.numbers("coefficients");
      if (a.size() != 3) throw field_error(init.field("coefficients"), "expected 3 numbers");
      coeffs = std::array<double, 3>{a[0], a[1], a[2]};
      if (!(std::abs(eps) * (std::abs(a[0]) + std::abs(a[1]) + std::abs(a[2])) < 1.0)) {
        throw field_error(init.field("eps"), "eps * sum |a_k| must be < 1 for a positive datum");
      }
    } else if (!(std::abs(eps) < 1.0 / 3.0)) {
      throw field_error(init.field("eps"), "|eps| must be < 1/3 with random coefficients in [-1, 1]");
    }
  }
  init.finish();
  auto checks = s.child("checks");
  const double slack = checks.number("decay_slack", D::decay_slack);
  const double mass_tol = checks.number("mass_tol", D::mass_tol);
  const auto window = checks.numbers("fit_window", std::vector<double>{D::fit_t0, D::fit_t1});
  if (window.size() != 2 || !(window[0] >= 0.0 && window[1] > window[0])) {
    throw field_error(checks.field("fit_window"), "expected [t0, t1] with 0 <= t0 < t1");
  }
  const double min_rate = checks.number("min_rate", D::min_rate);
  const bool improved = checks.flag("improved_rate", true);
  checks.finish();

  return [=](const RunContext& ctx) {
    Outcome out;
    const auto g = make_grid(d, grid.r_max, grid.n);
    RadialProfile v0 = barenblatt(m, g).profile;
    std::array<double, 3> a{};
    if (kind == "dilated") {
      v0 = dilated_barenblatt(g, m, lambda);
    } else if (kind == "perturbed") {
      if (coeffs) {
        a = *coeffs;
      } else {
        std::mt19937_64 rng(ctx.seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (auto& x : a) x = u(rng);
      }
      v0 = perturbed_barenblatt(g, m, eps, a);
    }
    const auto tr = run_rfd(v0, flow);
    const double f0 = tr.free_energy.front();
    double excess = -std::numeric_limits<double>::infinity(), drift = 0.0;
    for (std::size_t k = 0; k < tr.size(); ++k) {
      const double bound = f0 * std::exp(-4.0 * tr.times[k]) * (1.0 + slack * ctx.tol_scale) + D::energy_floor;
      excess = std::max(excess, tr.free_energy[k] - bound);
      drift = std::max(drift, std::abs(tr.mass[k] / tr.mass.front() - 1.0));
    }
    out.require(excess <= 0.0, "F(t) exceeds F(0) e^{-4t} (1 + " + fmt(slack * ctx.tol_scale) + ") by " + fmt(excess));
    out.require(drift <= mass_tol * ctx.tol_scale, "mass drift " + fmt(drift) + " > " + fmt(mass_tol * ctx.tol_scale));
    const auto [rate, samples] =
        detail::late_rate(tr, window[0], window[1], std::max(D::fit_floor * f0, 1e3 * D::energy_floor));
    const double eta = 2.0 * (d * m - d + 1.0);
    if (std::isfinite(rate)) {
      const double floor_rate = 4.0 - (4.0 - min_rate) * ctx.tol_scale;
      out.require(rate >= floor_rate, "late-window rate " + fmt(rate) + " < " + fmt(floor_rate));
      if (improved && eta > 0.0) {
        const double bound = 4.0 + eta - D::improved_rate_slack * ctx.tol_scale;
        out.require(rate >= bound, "late-window rate " + fmt(rate) + " < 4 + eta - slack = " + fmt(bound));
      }
    }
    out.tables.push_back({"", detail::trace_csv(tr), "t", {"F", "I"}, false, true});
    out.results = {{"initial", kind},
                   {"F_initial", f0},
                   {"F_final", tr.free_energy.back()},
                   {"rate", detail::number_or_null(rate)},
                   {"rate_samples", samples},
                   {"fit_window", window},
                   {"eta", eta},
                   {"improved_rate_bound", 4.0 + eta},
                   {"mass_drift", drift},
                   {"decay_excess", excess},
                   {"mass_rescaling", tr.mass_rescaling},
                   {"rejections", tr.rejections}};
    if (kind == "perturbed") out.results["coefficients"] = a;
    out.scalars = {{"F_initial", f0}, {"F_final", tr.free_energy.back()}, {"rate", rate}, {"mass_drift", drift}, {"eta", eta}};
    out.constants = constants_for(d, detail::gns_p_from_m(m));
    return out;
  };
}

inline Job prepare_spectrum(Section& s) {
  namespace D = defaults::spectrum;
  using detail::fmt;
  const int d = detail::parse_dim(s, D::d, 1);
  const double m = s.number("m", D::m);
  try {
    require_hardy_poincare_range(d, m);
  } catch (const InvalidArgument& e) {
    throw field_error(s.field("m"), e.what());
  }
  auto gs = s.child("grid");
  const std::size_t n = detail::parse_count(gs, "n", D::n, 100);
  const double r_max = gs.number("r_max", D::r_max);
  require_positive(gs, "r_max", r_max);
  gs.finish();
  const int ell_max = static_cast<int>(detail::parse_count(s, "ell_max", D::ell_max, 1));
  auto checks = s.child("checks");
  const double tol = checks.number("rel_tol", D::rel_tol);
  require_positive(checks, "rel_tol", tol);
  checks.finish();

  return [=](const RunContext& ctx) {
    Outcome out;
    const auto scan = hardy_poincare_scan(d, m, spectrum_grid(d, n, r_max), ell_max);
    Csv csv({"kind", "ell", "lambda", "alpha_est"});
    for (const auto& r : scan.sectors) csv.row("sector", r.ell, r.lambda, r.alpha_est);
    csv.row("unconstrained", scan.unconstrained.ell, scan.unconstrained.lambda, scan.unconstrained.alpha_est);
    csv.row("centered", scan.centered.ell, scan.centered.lambda, scan.centered.alpha_est);
    out.tables.push_back({"", csv.str(), "ell", {"lambda"}, false, false});
    const double expected = 4.0 * (2.0 - d * (1.0 - m));
    const double tl = tol * ctx.tol_scale;
    const double eu = std::abs(scan.unconstrained.lambda / 4.0 - 1.0);
    const double ec = std::abs(scan.centered.lambda / expected - 1.0);
    out.require(eu <= tl, "unconstrained gap " + fmt(scan.unconstrained.lambda) + " differs from 4 by " + fmt(eu));
    if (expected > 4.0 * (1.0 + tl)) {
      out.require(scan.unconstrained.ell == 1, "unconstrained gap attained in ell = " + std::to_string(scan.unconstrained.ell));
    }
    out.require(ec <= tl, "centered gap " + fmt(scan.centered.lambda) + " differs from 4(2-d(1-m)) = " + fmt(expected) +
                              " by " + fmt(ec));
    nlohmann::json sectors = nlohmann::json::array();
    for (const auto& r : scan.sectors) sectors.push_back(r.to_json());
    out.results = {{"sectors", sectors},
                   {"unconstrained", scan.unconstrained.to_json()},
                   {"centered", scan.centered.to_json()},
                   {"expected_unconstrained", 4.0},
                   {"expected_centered", expected}};
    out.scalars = {{"unconstrained_gap", scan.unconstrained.lambda},
                   {"centered_gap", scan.centered.lambda},
                   {"expected_centered", expected},
                   {"alpha_unconstrained", scan.unconstrained.alpha_est},
                   {"alpha_centered", scan.centered.alpha_est},
                   {"unconstrained_ell", static_cast<double>(scan.unconstrained.ell)},
                   {"centered_ell", static_cast<double>(scan.centered.ell)}};
    out.constants = constants_for(d, detail::gns_p_from_m(m));
    return out;
  };
}

inline Job prepare_deficit(Section& s) {
  namespace D = defaults::deficit;
  using detail::fmt;
  const int d = detail::parse_dim(s, D::d, 1);
  const std::string ineq = s.text("inequality", "sobolev", {"sobolev", "duality", "gns", "euclidean-lsi", "entropy"});
  if ((ineq == "sobolev" || ineq == "duality") && d < 3) {
    throw field_error(s.field("d"), "the " + ineq + " inequality requires d >= 3");
  }
  double p = 0.0, m = 0.0;
  if (ineq == "gns") {
    p = s.number("p", std::min(2.0, gns_max_exponent(d)));
    try {
      require_gns_exponent(p, d, "gns");
    } catch (const InvalidArgument& e) {
      throw field_error(s.field("p"), e.what());
    }
  }
  if (ineq == "entropy") {
    m = s.number("m", 0.5);
    const double mc = critical_mass_exponent(d);
    if (!(m > mc && m < 1.0)) {
      throw field_error(s.field("m"), "m = " + fmt(m) + " must satisfy (d-2)/d < m < 1; the bound (d-2)/d is " + fmt(mc));
    }
  }
  const auto grid = detail::parse_grid(s, D::r_max, D::n);
  auto fam = s.child("family");
  const bool entropy = ineq == "entropy";
  const std::vector<std::string> kinds =
      entropy ? std::vector<std::string>{"dilated-barenblatt", "perturbed-barenblatt"}
              : std::vector<std::string>{"g-star-bump", "conformal-mode2", "aubin-talenti", "gaussian"};
  const std::string kind = fam.text("kind", kinds.front(), kinds);
  if ((kind == "g-star-bump" || kind == "conformal-mode2" || kind == "aubin-talenti") && d < 3) {
    throw field_error(fam.field("kind"), "family '" + kind + "' requires d >= 3");
  }
  std::vector<double> params;
  std::size_t count = 0;
  if (kind == "g-star-bump") {
    params = fam.numbers("eps", std::vector<double>{0.02, 0.05, 0.1});
    for (double e : params) {
      if (!(e > -1.0)) throw field_error(fam.field("eps"), "values must be > -1");
    }
  } else if (kind == "conformal-mode2") {
    params = fam.numbers("eps", std::vector<double>{0.005, 0.01, 0.02});
    for (double e : params) {
      if (!(e > -1.0 / d && e < 1.0)) throw field_error(fam.field("eps"), "values must lie in (-1/d, 1)");
    }
  } else if (kind == "aubin-talenti") {
    params = fam.numbers("scale", std::vector<double>{1.0});
  } else if (kind == "gaussian" || kind == "dilated-barenblatt") {
    params = fam.numbers("lambda", std::vector<double>{kind == "gaussian" ? 1.0 : 1.2});
  } else {
    const double eps = fam.number("eps", 0.05);
    if (!(std::abs(eps) < 1.0 / 3.0)) throw field_error(fam.field("eps"), "|eps| must be < 1/3");
    count = detail::parse_count(fam, "count", 20, 1);
    params.assign(count, eps);
  }
  if (kind == "aubin-talenti" || kind == "gaussian" || kind == "dilated-barenblatt") {
    for (double x : params) {
      if (!(x > 0.0)) throw field_error(fam.field(kind == "aubin-talenti" ? "scale" : "lambda"), "values must be > 0");
    }
  }
  fam.finish();
  auto checks = s.child("checks");
  const double deficit_tol = checks.number("deficit_tol", D::deficit_tol);
  const double residual_tol = checks.number("residual_tol", D::residual_tol);
  const double phi_tol = checks.number("phi_tol", D::phi_tol);
  const double eep_tol = checks.number("eep_rel_tol", D::eep_rel_tol);
  const bool interval = checks.flag("interval", false);
  checks.finish();

  return [=](const RunContext& ctx) {
    Outcome out;
    const auto g = make_grid(d, grid.r_max, grid.n);
    std::mt19937_64 rng(ctx.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<std::string> header{"index", "param"};
    if (ineq == "duality") {
      header.insert(header.end(), {"L", "R", "residual", "ratio", "phi_slack", "relative_deficit"});
    } else if (entropy) {
      header.insert(header.end(), {"F", "I", "Q"});
      if (kind == "perturbed-barenblatt") header.insert(header.end(), {"a0", "a1", "a2"});
    } else {
      header.insert(header.end(), {"deficit", "distance", "quotient", "relative_deficit"});
    }
    Csv csv(header);
    const double inf = std::numeric_limits<double>::infinity();
    double min_rel = inf, max_residual = 0.0, min_phi = inf, c_est = -inf, min_q = inf, max_q = -inf;
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double x = params[i];
      if (entropy) {
        std::array<double, 3> a{};
        RadialProfile v = kind == "dilated-barenblatt" ? dilated_barenblatt(g, m, x) : barenblatt(m, g).profile;
        if (kind == "perturbed-barenblatt") {
          for (auto& c : a) c = unit(rng);
          v = perturbed_barenblatt(g, m, x, a);
        }
        const auto e = entropy_pair(v, m);
        const double q = e.quotient.value_or(detail::kNaN);
        if (e.quotient) {
          min_q = std::min(min_q, q);
          max_q = std::max(max_q, q);
        }
        std::vector<std::string> cells{Csv::cell(i), Csv::cell(x), Csv::cell(e.free_energy), Csv::cell(e.fisher), Csv::cell(q)};
        if (kind == "perturbed-barenblatt") {
          for (double c : a) cells.push_back(Csv::cell(c));
        }
        csv.row_cells(std::move(cells));
        continue;
      }
      RadialProfile f = kind == "g-star-bump"       ? perturbed_g_star(g, x)
                        : kind == "conformal-mode2" ? conformal_mode2(g, x)
                        : kind == "aubin-talenti"   ? aubin_talenti({x, 1.0}, g)
                                                    : gaussian_profile(g, x);
      if (ineq == "duality") {
        const auto dg = duality_gap(f);
        const double rel = dg.scale > 0.0 ? (dg.rhs - dg.lhs) / dg.scale : 0.0;
        const double ratio = dg.ratio.value_or(detail::kNaN);
        min_rel = std::min(min_rel, rel);
        max_residual = std::max(max_residual, dg.residual);
        min_phi = std::min(min_phi, dg.scale > 0.0 ? dg.phi_slack / dg.scale : 0.0);
        if (dg.ratio) c_est = std::max(c_est, ratio);
        csv.row(i, x, dg.lhs, dg.rhs, dg.residual, ratio, dg.phi_slack, rel);
        continue;
      }
      InequalityReport rep;
      double scale = 1.0;
      if (ineq == "sobolev") {
        rep = sobolev_deficit(f);
        scale = dirichlet_energy(f);
      } else if (ineq == "gns") {
        rep = gns_deficit(f, p);
        scale = lp_norm(f, 2.0 * p);
      } else {
        rep = euclidean_lsi_deficit(f.scaled(1.0 / lp_norm(f, 2.0)));
      }
      const double rel = rep.deficit / scale;
      min_rel = std::min(min_rel, rel);
      csv.row(i, x, rep.deficit, rep.distance, rep.quotient.value_or(detail::kNaN), rel);
    }
    out.tables.push_back({"", csv.str(), "param", {entropy ? "Q" : ineq == "duality" ? "ratio" : "deficit"}, false, false});
    const double ts = ctx.tol_scale;
    if (entropy) {
      out.require(!(min_q < 4.0 * (1.0 - eep_tol * ts)), "I/F = " + fmt(min_q) + " < 4 (1 - " + fmt(eep_tol * ts) + ")");
      out.results = {{"min_Q", detail::number_or_null(min_q)}, {"max_Q", detail::number_or_null(max_q)}};
      out.scalars = {{"min_Q", std::isfinite(min_q) ? min_q : detail::kNaN}, {"max_Q", std::isfinite(max_q) ? max_q : detail::kNaN}};
    } else {
      out.require(min_rel >= -deficit_tol * ts, "relative deficit " + fmt(min_rel) + " < -" + fmt(deficit_tol * ts));
      out.results = {{"min_relative_deficit", min_rel}};
      out.scalars = {{"min_relative_deficit", min_rel}};
    }
    if (ineq == "duality") {
      const double lower = d / (d + 4.0);
      const bool defined = std::isfinite(c_est);
      out.require(max_residual <= residual_tol * ts, "square-expansion residual " + fmt(max_residual));
      out.require(min_phi >= -phi_tol * ts, "phi-refinement slack " + fmt(min_phi) + " < -" + fmt(phi_tol * ts));
      out.require(!defined || c_est < 1.0, "C_est = " + fmt(c_est) + " >= 1");
      if (interval) {
        out.require(defined && c_est >= lower, "C_est = " + fmt(c_est) + " below d/(d+4) = " + fmt(lower));
      }
      out.results["max_residual"] = max_residual;
      out.results["min_phi_slack"] = min_phi;
      out.results["C_est"] = defined ? nlohmann::json(c_est) : nlohmann::json("undefined");
      out.results["C_lower"] = lower;
      out.scalars["max_residual"] = max_residual;
      out.scalars["min_phi_slack"] = min_phi;
      out.scalars["C_est"] = defined ? c_est : detail::kNaN;
    }
    out.results["inequality"] = ineq;
    out.results["family"] = kind;
    out.results["profiles"] = params.size();
    out.constants = constants_for(d, ineq == "gns" ? std::optional<double>(p)
                                     : entropy     ? detail::gns_p_from_m(m)
                                                   : std::nullopt);
    if (out.constants.count("S_d")) out.scalars["S_d"] = out.constants.at("S_d");
    return out;
  };
}

inline Job prepare_sphere(Section& s) {
  namespace D = defaults::sphere;
  using detail::fmt;
  const std::string mode = s.text("mode", "deficit", {"deficit", "flow", "large-d"});
  if (mode == "large-d") {
    const double p = s.number("p", D::large_d_p);
    if (!(p > 1.0 && p < 2.0)) throw field_error(s.field("p"), "must lie in (1, 2)");
    const auto dims = s.integers("dims", std::vector<long long>{8, 16, 32, 64});
    for (long long d : dims) {
      if (d < 1 || d > 4096) throw field_error(s.field("dims"), "values must lie in [1, 4096]");
    }
    const std::size_t nodes = detail::parse_count(s, "nodes", D::large_d_nodes, 8);
    auto prof = s.child("profile");
    const std::string kind = prof.text("kind", "bump", {"bump", "shifted-bump"});
    double width = 1.0, slope = 0.0;
    if (kind == "bump") {
      width = prof.number("width", 0.9);
      require_positive(prof, "width", width);
    } else {
      slope = prof.number("slope", 0.5);
    }
    prof.finish();
    auto checks = s.child("checks");
    const bool decreasing = checks.flag("decreasing", true);
    checks.finish();
    return [=](const RunContext&) {
      Outcome out;
      std::function<double(double)> v, dv;
      if (kind == "bump") {
        v = [=](double y) { return smooth_bump(y / width); };
        dv = [=](double y) { return smooth_bump_derivative(y / width) / width; };
      } else {
        v = [=](double y) { return smooth_bump(y) * (1.0 + slope * y); };
        dv = [=](double y) { return smooth_bump_derivative(y) * (1.0 + slope * y) + slope * smooth_bump(y); };
      }
      std::vector<int> ds(dims.begin(), dims.end());
      const auto rows = large_d_limit_check(v, dv, width, p, ds, nodes);
      Csv csv({"d", "r_d", "skipped", "sphere_value", "gaussian_value", "difference"});
      double prev = std::numeric_limits<double>::infinity(), first = detail::kNaN, last = detail::kNaN;
      bool strict = true;
      for (const auto& r : rows) {
        csv.row(r.d, r.r_d, r.skipped, r.sphere_value, r.gaussian_value, r.difference);
        if (r.skipped) continue;
        strict = strict && r.difference < prev;
        prev = r.difference;
        if (std::isnan(first)) first = r.difference;
        last = r.difference;
      }
      if (decreasing) out.require(strict, "differences are not strictly decreasing in d");
      out.tables.push_back({"", csv.str(), "d", {"difference"}, true, true});
      out.results = {{"profile", kind}, {"strictly_decreasing", strict}, {"gaussian_value", rows.front().gaussian_value}};
      out.scalars = {{"difference_first", first}, {"difference_last", last}, {"gaussian_value", rows.front().gaussian_value}};
      out.constants = constants_for(1, p);
      return out;
    };
  }

  const int d = detail::parse_dim(s, D::d, 1);
  const double p = s.number("p", D::p);
  try {
    ineqlab::detail::require_sphere_exponent(d, p, "sphere");
  } catch (const InvalidArgument& e) {
    throw field_error(s.field("p"), e.what());
  }

  if (mode == "deficit") {
    const std::size_t nodes = detail::parse_count(s, "nodes", D::nodes, 8);
    const auto eps = s.numbers("eps", logspace(1e-3, 1e-2, 8));
    for (double e : eps) {
      if (!(e > 0.0 && e < 1.0)) throw field_error(s.field("eps"), "values must lie in (0, 1)");
    }
    const std::string profile = s.text("profile", "cosine", {"cosine", "cosine2"});
    auto checks = s.child("checks");
    const double tol = checks.number("deficit_tol", D::deficit_tol);
    std::optional<double> expected;
    if (checks.has("expected_slope")) expected = checks.number("expected_slope");
    const double slope_tol = checks.number("slope_tol", D::slope_tol);
    checks.finish();
    if (expected && eps.size() < 2) throw field_error(s.field("eps"), "a slope check needs at least two values");
    return [=](const RunContext& ctx) {
      Outcome out;
      const auto g = ZonalGrid::make(d, nodes);
      const double k = profile == "cosine" ? 1.0 : 2.0;
      Csv csv({"eps", "deficit", "stability_functional", "quotient"});
      std::vector<double> def, stab;
      double qmin = std::numeric_limits<double>::infinity(), qmax = -qmin, worst = qmin;
      for (double e : eps) {
        const auto f = ZonalProfile::sample(g, [=](double t) { return 1.0 + e * std::cos(k * t); });
        const auto rep = sphere_deficit(f, p);
        const double q = rep.quotient.value_or(detail::kNaN);
        csv.row(e, rep.deficit, rep.distance, q);
        def.push_back(rep.deficit);
        stab.push_back(rep.distance);
        if (rep.quotient) {
          qmin = std::min(qmin, q);
          qmax = std::max(qmax, q);
        }
        worst = std::min(worst, rep.deficit / ineqlab::detail::zonal_norm2(f));
      }
      out.require(worst >= -tol * ctx.tol_scale, "deficit / ||F||^2 = " + fmt(worst));
      out.require(!(qmin <= 0.0), "quotient lower bound " + fmt(qmin) + " is not positive");
      out.tables.push_back({"", csv.str(), "eps", {"deficit", "stability_functional"}, true, true});
      out.results = {{"profile", profile},
                     {"q_min", detail::number_or_null(qmin)},
                     {"q_max", detail::number_or_null(qmax)}};
      out.scalars = {{"q_min", std::isfinite(qmin) ? qmin : detail::kNaN}, {"q_max", std::isfinite(qmax) ? qmax : detail::kNaN}};
      if (eps.size() == 1) {
        out.scalars["deficit"] = def[0];
        out.scalars["stability_functional"] = stab[0];
        out.scalars["quotient"] = std::isfinite(qmin) ? qmin : detail::kNaN;
      } else {
        bool positive = true;
        for (std::size_t i = 0; i < def.size(); ++i) positive = positive && def[i] > 0.0 && stab[i] > 0.0;
        const double sd = positive ? loglog_slope(eps, def) : detail::kNaN;
        const double ss = positive ? loglog_slope(eps, stab) : detail::kNaN;
        out.results["deficit_slope"] = detail::number_or_null(sd);
        out.results["stability_slope"] = detail::number_or_null(ss);
        out.scalars["deficit_slope"] = sd;
        out.scalars["stability_slope"] = ss;
        if (expected) {
          const double t = slope_tol * ctx.tol_scale;
          out.require(std::abs(sd - *expected) <= t, "deficit slope " + fmt(sd) + " differs from " + fmt(*expected));
          out.require(std::abs(ss - *expected) <= t, "stability slope " + fmt(ss) + " differs from " + fmt(*expected));
        }
      }
      out.constants = constants_for(d);
      return out;
    };
  }

  const auto [lo, hi] = m_exponents(d, p);
  const auto ms = s.numbers("m", std::vector<double>{lo, 0.5 * (lo + hi), hi});
  for (double m : ms) {
    if (m < lo - 1e-12 || m > hi + 1e-12) {
      throw field_error(s.field("m"), "m = " + fmt(m) + " outside [m_-, m_+] = [" + fmt(lo) + ", " + fmt(hi) + "]");
    }
  }
  const std::size_t nodes = detail::parse_count(s, "nodes", D::flow_nodes, 8);
  const double eps = s.number("eps", D::flow_eps);
  if (!(eps > 0.0 && eps < 1.0)) throw field_error(s.field("eps"), "must lie in (0, 1)");
  auto flow = detail::parse_flow(s, 0.0, D::dt, D::t_end, Scheme::SemiImplicit, D::record_every);
  auto checks = s.child("checks");
  const double tol = checks.number("monotone_tol", D::monotone_tol);
  checks.finish();
  return [=](const RunContext& ctx) {
    Outcome out;
    const auto f0 = ZonalProfile::sample(ZonalGrid::make(d, nodes), [=](double t) { return 1.0 + eps * std::cos(t); });
    nlohmann::json runs = nlohmann::json::array();
    bool all = true;
    for (std::size_t i = 0; i < ms.size(); ++i) {
      const auto tr = sphere_flow(f0, p, ms[i], flow);
      const bool mono = deficit_nonincreasing(tr, tol * ctx.tol_scale * std::abs(tr.deficit.front()));
      all = all && mono;
      out.require(mono, "deficit increased along the flow for m = " + fmt(ms[i]));
      double rate = detail::kNaN;
      if (flow.t_end > 1.0) {
        try {
          rate = sphere_decay_rate(tr, 1.0, flow.t_end);
        } catch (const InvalidArgument&) {
        }
      }
      runs.push_back({{"m", ms[i]},
                      {"monotone", mono},
                      {"deficit_initial", tr.deficit.front()},
                      {"deficit_final", tr.deficit.back()},
                      {"rate", detail::number_or_null(rate)}});
      out.tables.push_back({"m" + std::to_string(i), detail::trace_csv(tr), "t", {"deficit"}, false, true});
    }
    out.results = {{"m_minus", lo}, {"m_plus", hi}, {"runs", runs}};
    out.scalars = {{"m_minus", lo}, {"m_plus", hi}, {"all_monotone", all ? 1.0 : 0.0}};
    out.constants = constants_for(d);
    return out;
  };
}

inline Job prepare_gaussian(Section& s) {
  namespace D = defaults::gaussian;
  using detail::fmt;
  const std::string mode = s.text("mode", "lsi", {"lsi", "pls", "thmmain2"});
  const std::string norm_name = s.text("normalization", mode == "thmmain2" ? "standard" : "pi-normal", {"pi-normal", "standard"});
  if (mode == "thmmain2" && norm_name != "standard") {
    throw field_error(s.field("normalization"), "the compact-support check uses the standard normalization");
  }
  const auto norm = parse_normalization(norm_name);
  const std::size_t points = detail::parse_count(s, "points", D::points, 65);
  if (points % 2 == 0) throw field_error(s.field("points"), "must be odd");
  auto checks = s.child("checks");

  if (mode == "thmmain2") {
    const auto radii = s.numbers("radii", std::vector<double>{0.5, 1.0, 2.0});
    for (double r : radii) {
      if (!(r > 0.0)) throw field_error(s.field("radii"), "values must be > 0");
    }
    const std::size_t count = detail::parse_count(s, "count", 10, 1);
    const double tol = checks.number("tol", D::thm_tol);
    checks.finish();
    return [=](const RunContext& ctx) {
      Outcome out;
      const auto g = GaussianGrid::make(norm, points, D::half_width);
      std::mt19937_64 rng(ctx.seed);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      Csv csv({"R", "trial", "width", "shape", "lhs", "rhs", "margin", "passed"});
      double min_margin = std::numeric_limits<double>::infinity();
      nlohmann::json constants = nlohmann::json::object();
      for (double r : radii) {
        const auto k = thmmain2_constants(1, r);
        constants[fmt(r)] = {{"K_star", k.k_star}, {"C_star", k.c_star}, {"C", k.c}};
        for (std::size_t t = 0; t < count; ++t) {
          const double w = r * (0.3 + 0.7 * unit(rng));
          const double b = 2.0 * unit(rng) - 0.5;
          auto u = GaussianProfile::sample(g, [=](double x) { return smooth_bump(x / w) * (1.0 + b * x * x / (w * w)); });
          const double n = std::sqrt(ineqlab::detail::gaussian_norm2(u));
          for (auto& x : u.values) x /= n;
          const auto rep = thmmain2_verify(u, r, tol);
          csv.row(r, t, w, b, rep.lhs, rep.rhs, rep.margin, rep.passed);
          min_margin = std::min(min_margin, rep.margin);
          out.require(rep.passed, "R = " + fmt(r) + ", trial " + std::to_string(t) + ": margin " + fmt(rep.margin));
        }
      }
      out.tables.push_back({"", csv.str(), "R", {"margin"}, false, false});
      out.results = {{"C_star_1", thmmain2_c_star(1.0)}, {"constants", constants}, {"min_margin", min_margin}};
      out.scalars = {{"min_margin", min_margin}, {"C_star_1", thmmain2_c_star(1.0)}};
      out.constants = constants_for(1);
      return out;
    };
  }

  double p = 2.0;
  if (mode == "pls") {
    p = s.number("p", 1.5);
    if (!(p >= 1.0 && p < 2.0)) throw field_error(s.field("p"), "must lie in [1, 2)");
  }
  auto fam = s.child("family");
  const std::string kind = fam.text("kind", "exponential", {"exponential", "bump"});
  std::vector<double> params;
  double amp = 1.0;
  if (kind == "exponential") {
    params = fam.numbers("a", std::vector<double>{-1.1, 0.5, 0.7});
    amp = fam.number("c", 1.0);
    if (amp == 0.0) throw field_error(fam.field("c"), "must be nonzero");
  } else {
    params = fam.numbers("width", std::vector<double>{1.5});
    for (double w : params) {
      if (!(w > 0.0)) throw field_error(fam.field("width"), "values must be > 0");
    }
    amp = fam.number("offset", 0.1);
  }
  fam.finish();
  const double deficit_tol = checks.number("deficit_tol", D::deficit_tol);
  const bool expect_zero = checks.flag("expect_zero", mode == "lsi" && kind == "exponential");
  const double zero_deficit_tol = checks.number("zero_deficit_tol", D::zero_deficit_tol);
  const double zero_distance_tol = checks.number("zero_distance_tol", D::zero_distance_tol);
  const bool bridge = checks.flag("bridge", mode == "lsi");
  const double bridge_tol = checks.number("bridge_tol", D::bridge_tol);
  checks.finish();
  return [=](const RunContext& ctx) {
    Outcome out;
    const double ts = ctx.tol_scale;
    const auto g = GaussianGrid::make(norm, points, D::half_width);
    std::vector<std::string> header{"param", "deficit", "distance", "quotient"};
    if (mode == "lsi") header.insert(header.end(), {"logsob_a", "logsob_c"});
    if (bridge) header.push_back("bridge_residual");
    Csv csv(header);
    const auto pi_grid = GaussianGrid::make(GaussianNormalization::PiNormal, points, D::half_width);
    const auto st_grid = GaussianGrid::make(GaussianNormalization::Standard, points, D::half_width);
    const double sq = std::sqrt(2.0 * std::numbers::pi);
    double min_def = std::numeric_limits<double>::infinity(), max_abs = 0.0, max_dist = 0.0, max_bridge = 0.0;
    for (double x : params) {
      const std::function<double(double)> fn = kind == "exponential"
                                                   ? std::function<double(double)>([=](double y) { return amp * std::exp(x * y); })
                                                   : std::function<double(double)>([=](double y) { return smooth_bump(y / x) + amp; });
      const auto u = GaussianProfile::sample(g, fn);
      const auto rep = mode == "lsi" ? gaussian_lsi_deficit(u) : gaussian_pls_deficit(u, p);
      const double n2 = ineqlab::detail::gaussian_norm2(u);
      std::vector<std::string> cells{Csv::cell(x), Csv::cell(rep.deficit), Csv::cell(rep.distance),
                                     Csv::cell(rep.quotient.value_or(detail::kNaN))};
      if (mode == "lsi") {
        const auto ls = logsob_distance(u);
        cells.push_back(Csv::cell(ls.a));
        cells.push_back(Csv::cell(ls.c));
      }
      if (bridge) {
        const double lhs = gaussian_lsi_deficit(GaussianProfile::sample(pi_grid, fn)).deficit;
        const double rhs = 2.0 * std::numbers::pi *
                           gaussian_lsi_deficit(GaussianProfile::sample(st_grid, [&](double y) { return fn(y / sq); })).deficit;
        const double res = std::abs(lhs - rhs) / ineqlab::detail::gaussian_norm2(GaussianProfile::sample(pi_grid, fn));
        max_bridge = std::max(max_bridge, res);
        cells.push_back(Csv::cell(res));
      }
      csv.row_cells(std::move(cells));
      min_def = std::min(min_def, rep.deficit / n2);
      max_abs = std::max(max_abs, std::abs(rep.deficit));
      max_dist = std::max(max_dist, rep.distance);
    }
    out.require(min_def >= -deficit_tol * ts, "deficit / ||u||^2 = " + fmt(min_def));
    if (expect_zero) {
      out.require(max_abs <= zero_deficit_tol * ts, "exponential family deficit " + fmt(max_abs));
      out.require(max_dist <= zero_distance_tol * ts, "exponential family distance " + fmt(max_dist));
    }
    if (bridge) out.require(max_bridge <= bridge_tol * ts, "normalization bridge residual " + fmt(max_bridge));
    out.tables.push_back({"", csv.str(), "param", {"deficit"}, false, false});
    out.results = {{"family", kind},
                   {"normalization", norm_name},
                   {"min_relative_deficit", min_def},
                   {"max_abs_deficit", max_abs},
                   {"max_distance", max_dist}};
    out.scalars = {{"min_relative_deficit", min_def}, {"max_abs_deficit", max_abs}, {"max_distance", max_dist}};
    if (bridge) {
      out.results["max_bridge_residual"] = max_bridge;
      out.scalars["max_bridge_residual"] = max_bridge;
    }
    out.constants = constants_for(1, mode == "pls" ? std::optional<double>(p) : std::nullopt);
    return out;
  };
}

/// Validates `params` for `experiment` and returns the job with the resolved
/// parameter tree. Throws UsageError naming the offending field.
inline Prepared prepare(const std::string& experiment, const nlohmann::json& params, const std::string& path = "parameters") {
  Prepared out;
  Section s(params, path, &out.resolved);
  if (experiment == "yamabe") {
    out.job = prepare_yamabe(s);
  } else if (experiment == "rfd") {
    out.job = prepare_rfd(s);
  } else if (experiment == "spectrum") {
    out.job = prepare_spectrum(s);
  } else if (experiment == "deficit") {
    out.job = prepare_deficit(s);
  } else if (experiment == "sphere") {
    out.job = prepare_sphere(s);
  } else if (experiment == "gaussian") {
    out.job = prepare_gaussian(s);
  } else {
    throw field_error("experiment", "'" + experiment + "' cannot be prepared as a single run");
  }
  s.finish();
  return out;
}

}  // namespace ineqlab::cli
