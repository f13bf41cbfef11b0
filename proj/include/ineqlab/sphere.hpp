#pragma once

// Zonal functions F(theta) on S^d with the uniform probability measure.
// With x = cos(theta), d mu = (1 - x^2)^{(d-2)/2} dx / B(1/2, d/2), so the
// quadrature is Gauss-Jacobi with alpha = beta = (d-2)/2, and functions are
// represented by their interpolating polynomial in x.
//   |F'(theta)|^2 = (1 - x^2) (dF/dx)^2
//   Laplace-Beltrami = (1 - x^2) d^2/dx^2 - d x d/dx

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ineqlab/detail/numerics.hpp"
#include "ineqlab/error.hpp"
#include "ineqlab/flows.hpp"
#include "ineqlab/gaussian.hpp"
#include "ineqlab/report.hpp"

namespace ineqlab {

class ZonalGrid {
 public:
  static std::shared_ptr<const ZonalGrid> make(int d, std::size_t n = 64) {
    if (d < 1) throw InvalidArgument("ZonalGrid: sphere dimension d must be >= 1");
    if (n < 4) throw InvalidArgument("ZonalGrid: need at least 4 nodes");
    return std::shared_ptr<const ZonalGrid>(new ZonalGrid(d, n));
  }

  int dim() const { return d_; }
  std::size_t size() const { return x_.size(); }
  /// cos(theta_i), ascending.
  const std::vector<double>& xs() const { return x_; }
  const std::vector<double>& thetas() const { return theta_; }
  const std::vector<double>& weights() const { return w_; }
  /// d/dx on the interpolating polynomial.
  const Eigen::MatrixXd& dx() const { return dx_; }
  const Eigen::MatrixXd& laplacian() const { return lap_; }

  double integrate(const std::vector<double>& phi) const {
    if (phi.size() != size()) throw InvalidArgument("ZonalGrid: sample length does not match the grid");
    double s = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) s += w_[i] * phi[i];
    return s;
  }

 private:
  ZonalGrid(int d, std::size_t n) : d_(d) {
    const auto nn = static_cast<Eigen::Index>(n);
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(nn);
    Eigen::VectorXd off(nn - 1);
    for (Eigen::Index k = 1; k < nn; ++k) {
      const double kk = static_cast<double>(k);
      off[k - 1] = d == 1 ? (k == 1 ? std::sqrt(0.5) : 0.5)
                          : std::sqrt(kk * (kk + d - 2.0) / ((2.0 * kk + d - 1.0) * (2.0 * kk + d - 3.0)));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
    x_.resize(n);
    theta_.resize(n);
    w_.resize(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      x_[i] = es.eigenvalues()[ii];
      w_[i] = es.eigenvectors()(0, ii) * es.eigenvectors()(0, ii);
      total += w_[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      w_[i] /= total;
      theta_[i] = std::acos(x_[i]);
    }
    // barycentric weights of Gauss-Jacobi points: (-1)^j sqrt((1 - x_j^2) w_j)
    std::vector<double> bary(n);
    for (std::size_t j = 0; j < n; ++j) bary[j] = (j % 2 ? -1.0 : 1.0) * std::sqrt((1.0 - x_[j] * x_[j]) * w_[j]);
    dx_ = Eigen::MatrixXd::Zero(nn, nn);
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double v = bary[j] / bary[i] / (x_[i] - x_[j]);
        dx_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        row += v;
      }
      dx_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = -row;
    }
    const Eigen::Map<const Eigen::VectorXd> xv(x_.data(), nn);
    const Eigen::VectorXd one_minus = (1.0 - xv.array().square()).matrix();
    lap_ = one_minus.asDiagonal() * (dx_ * dx_) - static_cast<double>(d) * (xv.asDiagonal() * dx_);
  }

  int d_;
  std::vector<double> x_, theta_, w_;
  Eigen::MatrixXd dx_, lap_;
};

using ZonalGridPtr = std::shared_ptr<const ZonalGrid>;

struct ZonalProfile {
  ZonalGridPtr grid;
  std::vector<double> values;
  std::optional<std::vector<double>> dtheta;  // exact F'(theta) when supplied

  static ZonalProfile sample(const ZonalGridPtr& grid, const std::function<double(double)>& fn) {
    std::vector<double> v(grid->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(grid->thetas()[i]);
    check_finite(v);
    return {grid, std::move(v), std::nullopt};
  }

  static ZonalProfile sample(const ZonalGridPtr& grid, const std::function<double(double)>& fn,
                             const std::function<double(double)>& dfn) {
    auto p = sample(grid, fn);
    std::vector<double> dv(grid->size());
    for (std::size_t i = 0; i < dv.size(); ++i) dv[i] = dfn(grid->thetas()[i]);
    check_finite(dv);
    p.dtheta = std::move(dv);
    return p;
  }

  static void check_finite(const std::vector<double>& v) {
    for (double x : v) {
      if (!std::isfinite(x)) throw InvalidArgument("ZonalProfile: values must be finite");
    }
  }
};

/// 2^* = 2d/(d-2) for d >= 3, infinite otherwise.
inline double sphere_critical_exponent(int d) {
  return d >= 3 ? 2.0 * d / (d - 2.0) : std::numeric_limits<double>::infinity();
}

namespace detail {

inline std::vector<double> theta_derivative_squared(const ZonalProfile& f) {
  const auto& g = *f.grid;
  std::vector<double> out(g.size());
  if (f.dtheta) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*f.dtheta)[i] * (*f.dtheta)[i];
    return out;
  }
  const Eigen::Map<const Eigen::VectorXd> v(f.values.data(), static_cast<Eigen::Index>(f.values.size()));
  const Eigen::VectorXd dv = g.dx() * v;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = g.xs()[i];
    out[i] = (1.0 - x * x) * dv[static_cast<Eigen::Index>(i)] * dv[static_cast<Eigen::Index>(i)];
  }
  return out;
}

inline double zonal_moment(const ZonalProfile& f, const std::function<double(double)>& phi) {
  std::vector<double> s(f.values.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = phi(f.values[i]);
  return f.grid->integrate(s);
}

inline double zonal_norm2(const ZonalProfile& f) {
  return zonal_moment(f, [](double v) { return v * v; });
}

/// ||F||_q^2 - ||F||_2^2. For positive F both terms are expanded around the
/// mean, which keeps the O(eps^2) difference accurate for nearly constant F.
inline double norm_gap(const ZonalProfile& f, double q) {
  const double lo = *std::min_element(f.values.begin(), f.values.end());
  if (!(lo > 0.0)) {
    const double nq = std::pow(zonal_moment(f, [q](double v) { return std::pow(std::abs(v), q); }), 2.0 / q);
    return nq - zonal_norm2(f);
  }
  const double mean = zonal_moment(f, [](double v) { return v; });
  const auto excess = [&](double e) {
    // ||1 + h||_e^2 - 1 with h = F/mean - 1
    const double s = zonal_moment(f, [&](double v) { return std::expm1(e * std::log1p(v / mean - 1.0)); });
    return std::expm1(2.0 / e * std::log1p(s));
  };
  return mean * mean * (excess(q) - excess(2.0));
}

/// (1/2) int F^2 log(F^2 / ||F||_2^2) d mu.
inline double log_entropy(const ZonalProfile& f) {
  const double lo = *std::min_element(f.values.begin(), f.values.end());
  if (!(lo > 0.0)) {
    const double n2 = zonal_norm2(f);
    if (n2 == 0.0) return 0.0;
    return 0.5 * zonal_moment(f, [n2](double v) {
      const double q = v * v;
      return q > 0.0 ? q * std::log(q / n2) : 0.0;
    });
  }
  const double mean = zonal_moment(f, [](double v) { return v; });
  const double s2 = zonal_moment(f, [&](double v) {
    const double h = v / mean - 1.0;
    return h * (2.0 + h);
  });
  const double l2 = std::log1p(s2);
  // int (1+h)^2 (2 log(1+h) - log(1+s2)) with the O(h) part moved out of the integrand
  const double body = zonal_moment(f, [&](double v) {
    const double h = v / mean - 1.0;
    return (1.0 + h) * (1.0 + h) * 2.0 * std::log1p(h) - 2.0 * h;
  });
  const double rest = 2.0 * zonal_moment(f, [&](double v) { return v / mean - 1.0; }) - (1.0 + s2) * l2;
  return 0.5 * mean * mean * (body + rest);
}

inline void require_sphere_exponent(int d, double p, const char* what) {
  if (!(p >= 1.0) || !std::isfinite(p) || p > sphere_critical_exponent(d)) {
    throw InvalidArgument(std::string(what) + ": p = " + format_double(p) + " outside [1, 2^*] for d = " +
                          std::to_string(d));
  }
}

}  // namespace detail

/// int |F'(theta)|^2 d mu.
inline double sphere_energy(const ZonalProfile& f) { return f.grid->integrate(detail::theta_derivative_squared(f)); }

/// (||F||_p^2 - ||F||_2^2)/(p-2); at p = 2 the log form (1/2) int F^2 log(F^2/||F||_2^2).
inline double ep_functional(const ZonalProfile& f, double p) {
  detail::require_sphere_exponent(f.grid->dim(), p, "ep_functional");
  if (p == 2.0) return detail::log_entropy(f);
  return detail::norm_gap(f, p) / (p - 2.0);
}

/// Pi_1 F = (d + 1) <F, cos theta> cos theta.
inline ZonalProfile project_first_harmonic(const ZonalProfile& f) {
  const auto& g = *f.grid;
  std::vector<double> fx(g.size());
  for (std::size_t i = 0; i < fx.size(); ++i) fx[i] = f.values[i] * g.xs()[i];
  const double c = (g.dim() + 1.0) * g.integrate(fx);
  ZonalProfile p{f.grid, std::vector<double>(g.size()), std::nullopt};
  for (std::size_t i = 0; i < fx.size(); ++i) p.values[i] = c * g.xs()[i];
  if (f.dtheta) {
    std::vector<double> dp(g.size());
    for (std::size_t i = 0; i < dp.size(); ++i) dp[i] = -c * std::sin(g.thetas()[i]);
    p.dtheta = std::move(dp);
  }
  return p;
}

inline ZonalProfile subtract(const ZonalProfile& a, const ZonalProfile& b) {
  ZonalProfile out{a.grid, a.values, std::nullopt};
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= b.values[i];
  if (a.dtheta && b.dtheta) {
    auto dv = *a.dtheta;
    for (std::size_t i = 0; i < dv.size(); ++i) dv[i] -= (*b.dtheta)[i];
    out.dtheta = std::move(dv);
  }
  return out;
}

/// ||grad Pi_1 F||^4 / (||grad F||^2 + ||F||^2) + ||grad (Id - Pi_1) F||^2.
inline double stability_functional(const ZonalProfile& f) {
  const auto p1 = project_first_harmonic(f);
  const double e1 = sphere_energy(p1);
  return e1 * e1 / (sphere_energy(f) + detail::zonal_norm2(f)) + sphere_energy(subtract(f, p1));
}

/// ||F'||^2 - d E_p[F] with the stability functional as distance.
inline InequalityReport sphere_deficit(const ZonalProfile& f, double p) {
  const int d = f.grid->dim();
  InequalityReport rep;
  rep.name = "sphere_gns";
  rep.deficit = sphere_energy(f) - d * ep_functional(f, p);
  rep.distance = stability_functional(f);
  const double n2 = detail::zonal_norm2(f);
  rep.set_quotient_if_defined(1e-20 * n2 * n2);
  rep.constants["d"] = d;
  rep.constants["p"] = p;
  return rep;
}

/// ||F'||^2 - d(d-2)/4 (||F||_{2^*}^2 - ||F||_2^2); distance to constants only.
inline InequalityReport sphere_sobolev_deficit(const ZonalProfile& f) {
  const int d = f.grid->dim();
  if (d < 3) throw InvalidArgument("sphere_sobolev_deficit: requires d >= 3");
  const double k = 0.25 * d * (d - 2.0);
  InequalityReport rep;
  rep.name = "sphere_sobolev";
  rep.deficit = sphere_energy(f) - k * detail::norm_gap(f, sphere_critical_exponent(d));
  const double mean = detail::zonal_moment(f, [](double v) { return v; });
  rep.distance = k * detail::zonal_moment(f, [mean](double v) { return (v - mean) * (v - mean); });
  const double n2 = detail::zonal_norm2(f);
  rep.set_quotient_if_defined(1e-20 * n2);
  rep.constants["d"] = d;
  rep.constants["sobolev_prefactor"] = k;
  rep.metadata["distance"] = "restricted to constant functions";
  return rep;
}

/// m_pm(d, p) = (dp + 2 pm sqrt(d(p-1)(2d-(d-2)p))) / ((d+2)p).
inline std::pair<double, double> m_exponents(int d, double p) {
  if (d < 1) throw InvalidArgument("m_exponents: d must be >= 1");
  if (!(p > 0.0)) throw InvalidArgument("m_exponents: p must be > 0");
  double rad = d * (p - 1.0) * (2.0 * d - (d - 2.0) * p);
  if (rad < 0.0) {
    if (rad > -1e-12 * d * d * p) {
      rad = 0.0;
    } else {
      throw InvalidArgument("m_exponents: negative radicand for d = " + std::to_string(d) +
                            ", p = " + format_double(p));
    }
  }
  const double s = std::sqrt(rad);
  const double den = (d + 2.0) * p;
  return {(d * p + 2.0 - s) / den, (d * p + 2.0 + s) / den};
}

namespace detail {

/// u_t = u^{-p(1-m)} (Lap u + (mp - 1) |grad u|^2 / u) by collocation.
class SphereFlowOperator {
 public:
  SphereFlowOperator(const ZonalGrid& g, double p, double m)
      : g_(g), q_(p * (1.0 - m)), k_(m * p - 1.0), n_(static_cast<Eigen::Index>(g.size())) {
    s_.resize(n_);
    for (Eigen::Index i = 0; i < n_; ++i) s_[i] = 1.0 - g.xs()[static_cast<std::size_t>(i)] * g.xs()[static_cast<std::size_t>(i)];
  }

  Eigen::VectorXd rhs(const Eigen::VectorXd& u) const {
    const Eigen::VectorXd du = g_.dx() * u;
    const Eigen::VectorXd lu = g_.laplacian() * u;
    return (u.array().pow(-q_) * (lu.array() + k_ * s_.array() * du.array().square() / u.array())).matrix();
  }

  bool step(const TimeWeights& tw, double dt, std::vector<double>& next, bool newton, double tol,
            int max_iter) const {
    const Eigen::Map<const Eigen::VectorXd> hist(tw.hist.data(), n_);
    Eigen::Map<Eigen::VectorXd> u(next.data(), n_);
    if (!newton) {
      const Eigen::VectorXd a = u.array().pow(-q_).matrix();
      const Eigen::VectorXd du = g_.dx() * u;
      const Eigen::MatrixXd lhs =
          tw.a0 * Eigen::MatrixXd::Identity(n_, n_) - dt * (a.asDiagonal() * g_.laplacian());
      const Eigen::VectorXd b =
          hist + dt * (a.array() * k_ * s_.array() * du.array().square() / u.array()).matrix();
      const Eigen::VectorXd sol = lhs.partialPivLu().solve(b);
      if (!sol.allFinite() || sol.minCoeff() <= 0.0) return false;
      u = sol;
      return true;
    }
    for (int it = 0; it < max_iter; ++it) {
      if (u.minCoeff() <= 0.0) return false;
      const Eigen::VectorXd du = g_.dx() * u;
      const Eigen::VectorXd lu = g_.laplacian() * u;
      const Eigen::ArrayXd a = u.array().pow(-q_);
      const Eigen::ArrayXd inner = lu.array() + k_ * s_.array() * du.array().square() / u.array();
      const Eigen::VectorXd res = (tw.a0 * u - hist).array() - dt * a * inner;
      // d inner / du = L + k s (2 (du/u) D - (du/u)^2)
      const Eigen::ArrayXd ratio = du.array() / u.array();
      Eigen::MatrixXd jin = g_.laplacian() + (2.0 * k_ * (s_.array() * ratio)).matrix().asDiagonal() * g_.dx();
      jin.diagonal().array() -= k_ * s_.array() * ratio.square();
      Eigen::MatrixXd jac = -dt * (a.matrix().asDiagonal() * jin);
      jac.diagonal().array() += tw.a0 + dt * q_ * a * inner / u.array();
      const Eigen::VectorXd delta = jac.partialPivLu().solve(res);
      if (!delta.allFinite()) return false;
      u -= delta;
      if (delta.lpNorm<Eigen::Infinity>() <= tol * u.lpNorm<Eigen::Infinity>()) {
        return u.minCoeff() > 0.0;
      }
    }
    return false;
  }

 private:
  const ZonalGrid& g_;
  double q_, k_;
  Eigen::Index n_;
  Eigen::VectorXd s_;
};

}  // namespace detail

/// Nonlinear flow on S^d along which the GNS deficit is nonincreasing for m in [m_-, m_+].
inline FlowTrace sphere_flow(const ZonalProfile& f0, double p, double m, const FlowConfig& cfg) {
  cfg.validate();
  const auto& g = *f0.grid;
  const int d = g.dim();
  detail::require_sphere_exponent(d, p, "sphere_flow");
  if (*std::min_element(f0.values.begin(), f0.values.end()) <= 0.0) {
    throw InvalidArgument("sphere_flow: initial datum must be positive");
  }
  const auto [lo, hi] = m_exponents(d, p);
  const double slack = 1e-12;
  if (m < lo - slack || m > hi + slack) {
    throw InvalidArgument("sphere_flow: m = " + format_double(m) + " outside [m_-, m_+] = [" + format_double(lo) +
                          ", " + format_double(hi) + "]");
  }
  FlowTrace trace;
  trace.kind = "sphere";
  trace.m = m;
  const detail::SphereFlowOperator op(g, p, m);
  const bool newton = cfg.scheme == Scheme::ImplicitNewton;
  std::vector<double> u = f0.values;
  const auto record = [&](double t, const std::vector<double>& v) {
    const ZonalProfile prof{f0.grid, v, std::nullopt};
    trace.times.push_back(t);
    trace.mass.push_back(detail::zonal_moment(prof, [p](double x) { return std::pow(x, p); }));
    const double ep = ep_functional(prof, p);
    trace.ep.push_back(ep);
    trace.deficit.push_back(sphere_energy(prof) - d * ep);
    if (cfg.keep_profiles) trace.profiles.push_back(v);
  };
  detail::march(
      cfg, u, trace,
      [&](const detail::TimeWeights& tw, double dt, std::vector<double>& next) {
        return op.step(tw, dt, next, newton, cfg.newton_tol, cfg.newton_max_iter);
      },
      record, [](double, const std::vector<double>&) { return false; });
  return trace;
}

/// Exponential rate of E_p over [t0, t1], using samples with E_p above floor.
inline double sphere_decay_rate(const FlowTrace& trace, double t0, double t1, double floor = 1e-12) {
  std::vector<double> t, y;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    if (trace.times[k] >= t0 && trace.times[k] <= t1 && trace.ep[k] > floor) {
      t.push_back(trace.times[k]);
      y.push_back(std::log(trace.ep[k]));
    }
  }
  if (t.size() < 5) throw InvalidArgument("sphere_decay_rate: fewer than 5 samples in the window");
  return -detail::least_squares_slope(t, y);
}

/// True when every recorded deficit is at most the previous one plus tol.
inline bool deficit_nonincreasing(const FlowTrace& trace, double tol) {
  for (std::size_t k = 1; k < trace.deficit.size(); ++k) {
    if (trace.deficit[k] > trace.deficit[k - 1] + tol) return false;
  }
  return true;
}

struct LargeDRow {
  int d = 0;
  double r_d = 0.0;
  bool skipped = false;
  double sphere_deficit = 0.0;  // ||grad u_d||^2 - d E_p[u_d]
  double sphere_value = 0.0;    // (2 pi / d) sphere_deficit
  double gaussian_value = 0.0;  // ||v'||^2 - 2 pi E_p[v], pi-normal measure
  double difference = 0.0;
};

/// Embeds u_d(omega) = v(r_d omega_1), r_d = sqrt(d / (2 pi)), and compares the
/// rescaled sphere deficit with the Gaussian one it converges to.
inline std::vector<LargeDRow> large_d_limit_check(const std::function<double(double)>& v,
                                                  const std::function<double(double)>& dv, double support, double p,
                                                  const std::vector<int>& d_list, std::size_t nodes = 200) {
  if (!(p > 1.0 && p < 2.0)) throw InvalidArgument("large_d_limit_check: p must lie in (1, 2)");
  if (!(support > 0.0)) throw InvalidArgument("large_d_limit_check: support half-width must be > 0");
  const auto gg = GaussianGrid::make(GaussianNormalization::PiNormal);
  const auto gv = GaussianProfile::sample(gg, v);
  const double gaussian = gaussian_pls_deficit(gv, p).deficit;
  std::vector<LargeDRow> rows;
  for (int d : d_list) {
    LargeDRow row;
    row.d = d;
    row.r_d = std::sqrt(d / (2.0 * std::numbers::pi));
    row.gaussian_value = gaussian;
    if (support > row.r_d) {
      row.skipped = true;
      rows.push_back(row);
      continue;
    }
    const auto grid = ZonalGrid::make(d, nodes);
    const double rd = row.r_d;
    const auto f = ZonalProfile::sample(
        grid, [&](double th) { return v(rd * std::cos(th)); },
        [&](double th) { return -rd * std::sin(th) * dv(rd * std::cos(th)); });
    row.sphere_deficit = sphere_energy(f) - d * ep_functional(f, p);
    row.sphere_value = 2.0 * std::numbers::pi / d * row.sphere_deficit;
    row.difference = std::abs(row.sphere_value - gaussian);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace ineqlab
