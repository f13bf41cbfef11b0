#pragma once

// Radial finite-volume integrators for the Yamabe flow dv/dt = Delta v^m,
// m = (d-2)/(d+2), and for the fast diffusion equation in self-similar
// variables dv/dt + div(v (grad v^{m-1} - 2x)) = 0, with entropy traces and
// the backward-in-time quotient checks.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "ineqlab/detail/numerics.hpp"
#include "ineqlab/error.hpp"
#include "ineqlab/functionals.hpp"
#include "ineqlab/profiles.hpp"
#include "ineqlab/radial.hpp"
#include "ineqlab/report.hpp"

namespace ineqlab {

enum class Scheme { SemiImplicit, ImplicitNewton };

inline Scheme parse_scheme(std::string_view s) {
  if (s == "semi-implicit") return Scheme::SemiImplicit;
  if (s == "implicit-newton") return Scheme::ImplicitNewton;
  throw InvalidArgument("unknown scheme '" + std::string(s) + "' (semi-implicit | implicit-newton)");
}

inline std::string to_string(Scheme s) {
  return s == Scheme::SemiImplicit ? "semi-implicit" : "implicit-newton";
}

struct FlowConfig {
  double m = 0.5;
  double dt = 1e-3;
  double t_end = 1.0;
  Scheme scheme = Scheme::SemiImplicit;
  int record_every = 10;
  bool keep_profiles = false;
  int max_rejections = 20;
  int picard_sweeps = 5;
  double newton_tol = 1e-12;
  int newton_max_iter = 30;

  void validate() const {
    if (!(dt > 0.0)) throw InvalidArgument("FlowConfig: dt must be > 0");
    if (!(t_end > 0.0)) throw InvalidArgument("FlowConfig: t_end must be > 0");
    if (record_every < 1) throw InvalidArgument("FlowConfig: record_every must be >= 1");
    if (picard_sweeps < 1) throw InvalidArgument("FlowConfig: picard_sweeps must be >= 1");
  }
};

struct FlowTrace {
  std::string kind;  // "rfd", "yamabe" or "sphere"
  GridPtr grid;
  double m = 0.0;
  std::vector<double> times;
  std::vector<double> mass;
  std::vector<double> free_energy;  // rfd
  std::vector<double> fisher;       // rfd
  std::vector<double> quotient;     // rfd, NaN where F < 1e-14
  std::vector<double> H;            // yamabe
  std::vector<double> J;            // yamabe
  std::vector<double> deficit;      // sphere
  std::vector<double> ep;           // sphere
  std::vector<std::vector<double>> profiles;  // nodal values, when kept
  bool extinct = false;
  double extinction_time = std::numeric_limits<double>::quiet_NaN();
  int rejections = 0;
  double mass_rescaling = 1.0;

  std::size_t size() const { return times.size(); }

  void write_csv(std::ostream& os) const {
    if (kind == "yamabe") {
      os << "t,mass,H,J\n";
      for (std::size_t k = 0; k < times.size(); ++k) {
        os << format_double(times[k]) << ',' << format_double(mass[k]) << ','
           << format_double(H[k]) << ',' << format_double(J[k]) << '\n';
      }
    } else if (kind == "sphere") {
      os << "t,mass,deficit,E_p\n";
      for (std::size_t k = 0; k < times.size(); ++k) {
        os << format_double(times[k]) << ',' << format_double(mass[k]) << ','
           << format_double(deficit[k]) << ',' << format_double(ep[k]) << '\n';
      }
    } else {
      os << "t,mass,F,I,Q\n";
      for (std::size_t k = 0; k < times.size(); ++k) {
        os << format_double(times[k]) << ',' << format_double(mass[k]) << ','
           << format_double(free_energy[k]) << ',' << format_double(fisher[k]) << ','
           << format_double(quotient[k]) << '\n';
      }
    }
  }
};

namespace detail {

/// Node-centred control volumes: cell i spans the midpoints around r_i.
struct FvGeometry {
  std::vector<double> volume;  // per node
  std::vector<double> area;    // per face between nodes i and i+1
  std::vector<double> dr;
  std::vector<double> face_r;
  double outer_area = 0.0;

  explicit FvGeometry(const RadialGrid& g) {
    const auto r = g.nodes();
    const std::size_t n = r.size();
    const int d = g.dim();
    const double s = g.surface_factor();
    volume.resize(n);
    area.resize(n - 1);
    dr.resize(n - 1);
    face_r.resize(n - 1);
    for (std::size_t f = 0; f + 1 < n; ++f) {
      face_r[f] = 0.5 * (r[f] + r[f + 1]);
      dr[f] = r[f + 1] - r[f];
      area[f] = s * std::pow(face_r[f], d - 1);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double lo = i == 0 ? 0.0 : face_r[i - 1];
      const double hi = i + 1 == n ? r[n - 1] : face_r[i];
      volume[i] = s * (std::pow(hi, d) - std::pow(lo, d)) / d;
    }
    outer_area = s * std::pow(r[n - 1], d - 1);
  }

  double total(const std::vector<double>& v) const {
    double m = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) m += volume[i] * v[i];
    return m;
  }
};

/// Backward Euler (a0 = 1, hist = v^n) or variable-step BDF2 weights.
struct TimeWeights {
  double a0;
  std::vector<double> hist;
};

inline TimeWeights time_weights(const std::vector<double>& v, const std::vector<double>* prev,
                                double dt, double dt_prev) {
  if (!prev) return {1.0, v};
  const double w = dt / dt_prev;
  TimeWeights tw{(1.0 + 2.0 * w) / (1.0 + w), std::vector<double>(v.size())};
  const double c1 = 1.0 + w;
  const double c2 = w * w / (1.0 + w);
  for (std::size_t i = 0; i < v.size(); ++i) tw.hist[i] = c1 * v[i] - c2 * (*prev)[i];
  return tw;
}

struct Tridiagonal {
  std::vector<double> lower, diag, upper, rhs;
  explicit Tridiagonal(std::size_t n) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0) {}
};

/// Fast diffusion in self-similar variables. The face flux is
/// A v_f (G_{i+1} - G_i)/dr with G = v^{m-1} - (1 + r^2), so the Barenblatt
/// profile is an exact discrete equilibrium and dF/dt = -I holds for the
/// semi-discrete scheme.
class RfdOperator {
 public:
  RfdOperator(const GridPtr& grid, double m) : geo_(*grid), m_(m) {
    const auto r = grid->nodes();
    q_.resize(r.size());
    b_.resize(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
      q_[i] = 1.0 + r[i] * r[i];
      b_[i] = std::pow(q_[i], 1.0 / (m - 1.0));
    }
  }

  const FvGeometry& geometry() const { return geo_; }
  const std::vector<double>& barenblatt() const { return b_; }

  double free_energy(const std::vector<double>& v) const {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double y = v[i] / b_[i] - 1.0;
      double e = std::pow(b_[i], m_) * (std::expm1(m_ * std::log1p(y)) - m_ * y) / (m_ - 1.0);
      if (e < 0.0 && e > -1e-14) e = 0.0;
      s += geo_.volume[i] * e;
    }
    return s;
  }

  double fisher(const std::vector<double>& v) const {
    double s = 0.0;
    for (std::size_t f = 0; f + 1 < v.size(); ++f) {
      const double dg = g(v, f + 1) - g(v, f);
      s += geo_.area[f] * 0.5 * (v[f] + v[f + 1]) * dg * dg / geo_.dr[f];
    }
    return m_ / (1.0 - m_) * s;
  }

  /// One implicit step a0 v - hist = -dt div(flux(v)). Returns false when a
  /// cell turns nonpositive or Newton fails to converge.
  bool step(const TimeWeights& tw, double dt, std::vector<double>& v, bool newton, int sweeps,
            double tol, int max_iter) const {
    const std::size_t n = v.size();
    const int iterations = newton ? max_iter : sweeps;
    for (int it = 0; it < iterations; ++it) {
      Tridiagonal sys(n);
      for (std::size_t i = 0; i < n; ++i) {
        sys.diag[i] = geo_.volume[i] * tw.a0 / dt;
        sys.rhs[i] = -geo_.volume[i] * (tw.a0 * v[i] - tw.hist[i]) / dt;
      }
      for (std::size_t f = 0; f + 1 < n; ++f) {
        const double a = geo_.area[f] / geo_.dr[f];
        const double vf = 0.5 * (v[f] + v[f + 1]);
        const double dg = g(v, f + 1) - g(v, f);
        const double flux = a * vf * dg;
        const double nw = newton ? 0.5 * a * dg : 0.0;
        const double dl = nw - a * vf * gprime(v[f]);
        const double dr = nw + a * vf * gprime(v[f + 1]);
        // flux leaves cell f and enters cell f+1
        sys.rhs[f] -= flux;
        sys.rhs[f + 1] += flux;
        sys.diag[f] += dl;
        sys.upper[f] += dr;
        sys.lower[f + 1] -= dl;
        sys.diag[f + 1] -= dr;
      }
      const auto delta = solve_tridiagonal(sys.lower, sys.diag, sys.upper, sys.rhs);
      double change = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        v[i] += delta[i];
        if (!(v[i] > 0.0) || !std::isfinite(v[i])) return false;
        change = std::max(change, std::abs(delta[i]) / v[i]);
      }
      if (newton && change <= tol) return true;
    }
    return !newton;
  }

 private:
  double g(const std::vector<double>& v, std::size_t i) const {
    return std::pow(v[i], m_ - 1.0) - q_[i];
  }
  double gprime(double v) const { return (m_ - 1.0) * std::pow(v, m_ - 2.0); }

  FvGeometry geo_;
  double m_;
  std::vector<double> q_;
  std::vector<double> b_;
};

/// Yamabe flow in the unknown P = v^m. The outer face carries the flux of
/// the harmonic tail: dP/dr = -(d-2) P / R.
class YamabeOperator {
 public:
  YamabeOperator(const GridPtr& grid, double m) : geo_(*grid), m_(m), d_(grid->dim()), r_max_(grid->r_max()) {}

  const FvGeometry& geometry() const { return geo_; }

  bool step(const TimeWeights& tw, double dt, std::vector<double>& v, double tol,
            int max_iter) const {
    const std::size_t n = v.size();
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = std::pow(v[i], m_);
    const double e = 1.0 / m_;
    const double robin = geo_.outer_area * (d_ - 2.0) / r_max_;
    for (int it = 0; it < max_iter; ++it) {
      Tridiagonal sys(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double vi = std::pow(p[i], e);
        sys.diag[i] = geo_.volume[i] * tw.a0 * e * vi / p[i] / dt;
        sys.rhs[i] = -geo_.volume[i] * (tw.a0 * vi - tw.hist[i]) / dt;
      }
      for (std::size_t f = 0; f + 1 < n; ++f) {
        const double a = geo_.area[f] / geo_.dr[f];
        const double flux = a * (p[f + 1] - p[f]);  // into cell f from f+1
        sys.rhs[f] += flux;
        sys.rhs[f + 1] -= flux;
        sys.diag[f] += a;
        sys.upper[f] -= a;
        sys.lower[f + 1] -= a;
        sys.diag[f + 1] += a;
      }
      sys.rhs[n - 1] -= robin * p[n - 1];
      sys.diag[n - 1] += robin;
      const auto delta = solve_tridiagonal(sys.lower, sys.diag, sys.upper, sys.rhs);
      double change = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        p[i] += delta[i];
        if (!(p[i] > 0.0) || !std::isfinite(p[i])) return false;
        change = std::max(change, std::abs(delta[i]) / p[i]);
      }
      if (change <= tol) {
        for (std::size_t i = 0; i < n; ++i) v[i] = std::pow(p[i], e);
        return true;
      }
    }
    return false;
  }

 private:
  FvGeometry geo_;
  double m_;
  int d_;
  double r_max_;
};

template <class Step, class Record, class Stop>
void march(const FlowConfig& cfg, std::vector<double>& v, FlowTrace& trace, Step&& step,
           Record&& record, Stop&& stop) {
  double t = 0.0;
  long count = 0;
  std::vector<double> prev;
  double dt_prev = 0.0;
  const bool bdf2 = cfg.scheme == Scheme::ImplicitNewton;
  record(t, v);
  while (true) {
    const double remaining = cfg.t_end - t;
    if (remaining <= 1e-12 * std::max(1.0, cfg.t_end)) break;
    double dt = std::min(cfg.dt, remaining);
    int rejected = 0;
    std::vector<double> next;
    while (true) {
      const auto tw = time_weights(v, bdf2 && !prev.empty() ? &prev : nullptr, dt, dt_prev);
      next = v;
      if (step(tw, dt, next)) break;
      if (++rejected > cfg.max_rejections) {
        throw BlowDownInstability("flow step rejected " + std::to_string(rejected) +
                                  " times at t = " + format_double(t));
      }
      dt *= 0.5;
    }
    trace.rejections += rejected;
    prev = std::move(v);
    v = std::move(next);
    dt_prev = dt;
    t += dt;
    ++count;
    const bool done = stop(t, v);
    if (done || count % cfg.record_every == 0 || cfg.t_end - t <= 1e-12 * std::max(1.0, cfg.t_end)) {
      record(t, v);
    }
    if (done) break;
  }
}

}  // namespace detail

/// Rescaled fast diffusion from v0, which must carry the Barenblatt mass.
inline FlowTrace run_rfd(const RadialProfile& v0, const FlowConfig& cfg) {
  cfg.validate();
  const auto& grid = v0.grid_ptr();
  const int d = grid->dim();
  const double m = cfg.m;
  if (!(m > critical_mass_exponent(d) && m < 1.0)) {
    throw InvalidArgument("run_rfd: m must lie in (m_c, 1)");
  }
  detail::require_nonnegative(v0, "run_rfd");
  detail::matching_barenblatt(v0, m, "run_rfd");

  const detail::RfdOperator op(grid, m);
  const auto& geo = op.geometry();
  std::vector<double> v(v0.values().begin(), v0.values().end());
  for (double x : v) {
    if (!(x > 0.0)) throw InvalidArgument("run_rfd: initial datum must be positive on the grid");
  }
  FlowTrace trace;
  trace.kind = "rfd";
  trace.grid = grid;
  trace.m = m;
  // The truncated finite-volume mass of the Barenblatt profile is the target.
  trace.mass_rescaling = geo.total(op.barenblatt()) / geo.total(v);
  for (double& x : v) x *= trace.mass_rescaling;

  auto record = [&](double t, const std::vector<double>& state) {
    const double f = op.free_energy(state);
    const double i = op.fisher(state);
    trace.times.push_back(t);
    trace.mass.push_back(geo.total(state));
    trace.free_energy.push_back(f);
    trace.fisher.push_back(i);
    trace.quotient.push_back(f >= 1e-14 ? i / f : std::numeric_limits<double>::quiet_NaN());
    if (cfg.keep_profiles) trace.profiles.push_back(state);
  };
  const bool newton = cfg.scheme == Scheme::ImplicitNewton;
  detail::march(
      cfg, v, trace,
      [&](const detail::TimeWeights& tw, double dt, std::vector<double>& next) {
        return op.step(tw, dt, next, newton, cfg.picard_sweeps, cfg.newton_tol, cfg.newton_max_iter);
      },
      record, [](double, const std::vector<double>&) { return false; });
  return trace;
}

namespace detail {

inline double hls_functional_h(const RadialProfile& v, double s) {
  return -hls_gap(v, newton_potential(v).u, s);
}

}  // namespace detail

/// Yamabe flow from v0 > 0 until t_end or extinction (max v < 1e-8 max v0).
inline FlowTrace run_yamabe(const RadialProfile& v0, const FlowConfig& cfg) {
  cfg.validate();
  const auto& grid = v0.grid_ptr();
  const int d = grid->dim();
  if (d < 3) throw InvalidArgument("run_yamabe: requires d >= 3");
  const double m = yamabe_exponent(d);
  if (std::abs(cfg.m - m) > 1e-12) {
    throw InvalidArgument("run_yamabe: m must equal (d-2)/(d+2) = " + format_double(m));
  }
  std::vector<double> v(v0.values().begin(), v0.values().end());
  double vmax0 = 0.0;
  for (double x : v) {
    if (!(x > 0.0)) throw InvalidArgument("run_yamabe: initial datum must be positive");
    vmax0 = std::max(vmax0, x);
  }
  const detail::YamabeOperator op(grid, m);
  const double s = sobolev_constant(grid);
  const double q = 2.0 * d / (d + 2.0);
  FlowTrace trace;
  trace.kind = "yamabe";
  trace.grid = grid;
  trace.m = m;

  auto record = [&](double t, const std::vector<double>& state) {
    const RadialProfile prof(grid, state, d + 2.0);
    trace.times.push_back(t);
    trace.mass.push_back(op.geometry().total(state));
    trace.H.push_back(detail::hls_functional_h(prof, s));
    trace.J.push_back(lp_integral(prof, q));
    if (cfg.keep_profiles) trace.profiles.push_back(state);
  };
  auto stop = [&](double t, const std::vector<double>& state) {
    const double vmax = *std::max_element(state.begin(), state.end());
    if (vmax < 1e-8 * vmax0) {
      trace.extinct = true;
      trace.extinction_time = t;
      return true;
    }
    return false;
  };
  detail::march(
      cfg, v, trace,
      [&](const detail::TimeWeights& tw, double dt, std::vector<double>& next) {
        return op.step(tw, dt, next, cfg.newton_tol, cfg.newton_max_iter);
      },
      record, stop);
  return trace;
}

/// Least-squares slope of -log F over recorded times in [t0, t1].
inline double fit_decay_rate(const FlowTrace& trace, double t0, double t1) {
  std::vector<double> t, y;
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    if (trace.times[k] >= t0 && trace.times[k] <= t1) {
      if (!(trace.free_energy[k] > 0.0)) {
        throw InvalidArgument("fit_decay_rate: free energy must be positive on the window");
      }
      t.push_back(trace.times[k]);
      y.push_back(-std::log(trace.free_energy[k]));
    }
  }
  if (t.size() < 5) throw InvalidArgument("fit_decay_rate: window holds fewer than 5 samples");
  return detail::least_squares_slope(t, y);
}

struct RateConstants {
  double eta = 0.0;
  double chi = 0.0;
  double zeta = 0.0;
  double t_star = 0.0;
};

/// zeta = 4 eta e^{-4 t*} / (4 + eta - eta e^{-4 t*}).
inline double backward_zeta(double eta, double t_star) {
  const double e = std::exp(-4.0 * t_star);
  return 4.0 * eta * e / (4.0 + eta - eta * e);
}

/// eta = 2(dm - d + 1), chi = m/(266 + 56 m), zeta from (eta, t*).
inline RateConstants rate_constants(int d, double m, double t_star) {
  const double eta = 2.0 * (d * m - d + 1.0);
  if (!(eta > 0.0)) throw InvalidArgument("rate_constants: requires eta = 2(dm-d+1) > 0");
  if (t_star < 0.0) throw InvalidArgument("rate_constants: t_star must be >= 0");
  return {eta, m / (266.0 + 56.0 * m), backward_zeta(eta, t_star), t_star};
}

struct CheckReport {
  bool hypothesis_met = false;
  bool passed = false;
  double margin = 0.0;
  std::string detail;
};

/// If Q(t*) >= 4 + eta, then Q >= 4 + zeta on [0, t*] and dQ/dt <= Q (Q - 4).
inline CheckReport backward_lemma_check(const FlowTrace& trace, double eta, double t_star,
                                        double tol = 1e-2) {
  CheckReport rep;
  const auto& q = trace.quotient;
  std::size_t k_star = trace.times.size();
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    if (trace.times[k] <= t_star * (1.0 + 1e-12) + 1e-15) k_star = k;
  }
  if (k_star == trace.times.size() || std::isnan(q[k_star]) || q[k_star] < 4.0 + eta) {
    rep.detail = "hypothesis not met: Q(t*) < 4 + eta or undefined";
    return rep;
  }
  rep.hypothesis_met = true;
  const double zeta = backward_zeta(eta, trace.times[k_star]);
  double worst = std::numeric_limits<double>::infinity();
  double ode = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= k_star; ++k) {
    if (std::isnan(q[k])) continue;
    worst = std::min(worst, q[k] - (4.0 + zeta));
    if (k > 0 && !std::isnan(q[k - 1])) {
      const double dq = (q[k] - q[k - 1]) / (trace.times[k] - trace.times[k - 1]);
      const double qm = 0.5 * (q[k] + q[k - 1]);
      ode = std::max(ode, dq - qm * (qm - 4.0));
    }
  }
  rep.margin = worst;
  rep.passed = worst >= -tol && ode <= tol;
  rep.detail = "zeta=" + format_double(zeta) + " min(Q-4-zeta)=" + format_double(worst) +
               " max(dQ/dt-Q(Q-4))=" + format_double(ode);
  return rep;
}

/// I - 4F >= zeta/(4+zeta) I within 1e-3 relative. Radial data are centred,
/// so the only hypothesis checked is that F is positive.
inline CheckReport eep_stability_check(const RadialProfile& v, double m, double zeta) {
  CheckReport rep;
  const auto e = entropy_pair(v, m);
  rep.hypothesis_met = true;
  const double lhs = e.fisher - 4.0 * e.free_energy;
  const double rhs = zeta / (4.0 + zeta) * e.fisher;
  rep.margin = lhs - rhs;
  rep.passed = rep.margin >= -1e-3 * std::max(e.fisher, 1e-300) || e.fisher == 0.0;
  rep.detail = "I=" + format_double(e.fisher) + " F=" + format_double(e.free_energy);
  return rep;
}

/// First recorded time with sup |v/B - 1| <= eps (needs kept profiles).
inline std::optional<double> threshold_time(const FlowTrace& trace, double eps) {
  if (trace.kind != "rfd" || trace.profiles.empty()) {
    throw InvalidArgument("threshold_time: needs an rfd trace with kept profiles");
  }
  const auto b = barenblatt(trace.m, trace.grid);
  for (std::size_t k = 0; k < trace.profiles.size(); ++k) {
    double worst = 0.0;
    for (std::size_t i = 0; i < b.profile.size(); ++i) {
      worst = std::max(worst, std::abs(trace.profiles[k][i] / b.profile[i] - 1.0));
    }
    if (worst <= eps) return trace.times[k];
  }
  return std::nullopt;
}

struct ExtinctionFit {
  double lambda = 1.0;
  double error = 0.0;
};

/// Distance of a Yamabe state to the extinction profile: w = v/v(0) is
/// compared with (1 + r^2/lambda^2)^{-(d+2)/2}, lambda by least squares, and
/// the error is sup |w/profile - 1| over r <= 5 lambda.
inline ExtinctionFit extinction_profile_fit(const RadialProfile& v) {
  const int d = v.dim();
  const auto r = v.grid().nodes();
  const auto wts = v.grid().weights();
  if (!(v[0] > 0.0)) throw InvalidArgument("extinction_profile_check: state vanishes at the origin");
  const double e = -0.5 * (d + 2);
  auto shape = [&](double lambda, double x) { return std::pow(1.0 + x * x / (lambda * lambda), e); };
  auto misfit = [&](double log_lambda) {
    const double lambda = std::exp(log_lambda);
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double diff = v[i] / v[0] - shape(lambda, r[i]);
      s += wts[i] * diff * diff;
    }
    return s;
  };
  const auto best = detail::scan_then_golden(misfit, std::log(1e-4 * r.back()), std::log(r.back()), 97, 1e-10);
  ExtinctionFit fit;
  fit.lambda = std::exp(best.x);
  for (std::size_t i = 0; i < v.size() && r[i] <= 5.0 * fit.lambda; ++i) {
    fit.error = std::max(fit.error, std::abs(v[i] / v[0] / shape(fit.lambda, r[i]) - 1.0));
  }
  return fit;
}

/// extinction_profile_fit of the kept state whose time to extinction is
/// closest to `time_to_extinction`.
inline ExtinctionFit extinction_profile_check(const FlowTrace& trace, double time_to_extinction) {
  if (trace.kind != "yamabe" || !trace.extinct) {
    throw InvalidArgument("extinction_profile_check: extinction was not reached");
  }
  if (trace.profiles.empty()) throw InvalidArgument("extinction_profile_check: no kept profiles");
  std::size_t best = 0;
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < trace.profiles.size(); ++k) {
    const double g = std::abs(trace.extinction_time - trace.times[k] - time_to_extinction);
    if (g < gap) {
      gap = g;
      best = k;
    }
  }
  return extinction_profile_fit(RadialProfile(trace.grid, trace.profiles[best], trace.grid->dim() + 2.0));
}

}  // namespace ineqlab
