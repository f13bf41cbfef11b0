#pragma once

// Hardy-Poincare gaps of the linearized fast-diffusion operator around the
// Barenblatt profile, one spherical-harmonic sector at a time.
//
// Sector ell of w(x) = w(r) Y_ell(x/|x|) gives the quadratic forms
//   I_ell[w] = m(1-m) |S^{d-1}| int (|w'|^2 + ell(ell+d-2) r^{-2} w^2) B r^{d-1} dr
//   F_ell[w] = (m/2)  |S^{d-1}| int w^2 B^{2-m} r^{d-1} dr
// discretized with piecewise-linear elements on the radial grid, lumped
// mass and lumped centrifugal term. Sectors ell >= 1 pin w(0) = 0.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "ineqlab/detail/numerics.hpp"
#include "ineqlab/error.hpp"
#include "ineqlab/profiles.hpp"
#include "ineqlab/radial.hpp"
#include <nlohmann/json.hpp>

namespace ineqlab {

/// Linear constraint sum_i coeffs[i] w_i = 0 on nodal values.
using LinearConstraint = std::vector<double>;

struct SectorOperator {
  int d = 0;
  double m = 0.0;
  int ell = 0;
  GridPtr grid;
  // energy_form = tridiagonal stiffness (diag, off) + diagonal centrifugal term
  std::vector<double> stiff_diag;
  std::vector<double> stiff_off;
  std::vector<double> centrifugal;
  std::vector<double> mass_form;
  std::vector<LinearConstraint> constraints;

  std::size_t size() const { return mass_form.size(); }
  /// First free node: 0 for ell = 0, 1 otherwise.
  std::size_t first() const { return ell == 0 ? 0 : 1; }

  double energy(std::span<const double> w) const {
    check(w);
    const std::size_t s = first();
    double e = 0.0;
    for (std::size_t i = s; i < size(); ++i) {
      e += (stiff_diag[i] + centrifugal[i]) * w[i] * w[i];
      if (i + 1 < size()) e += 2.0 * stiff_off[i] * w[i] * w[i + 1];
    }
    return e;
  }

  double mass(std::span<const double> w) const {
    check(w);
    double e = 0.0;
    for (std::size_t i = first(); i < size(); ++i) e += mass_form[i] * w[i] * w[i];
    return e;
  }

  double rayleigh_quotient(std::span<const double> w) const { return energy(w) / mass(w); }

 private:
  void check(std::span<const double> w) const {
    if (w.size() != size()) throw InvalidArgument("SectorOperator: vector length does not match the grid");
  }
};

/// Range of m covered by the Hardy-Poincare inequality.
inline void require_hardy_poincare_range(int d, double m) {
  bool ok = false;
  std::string range;
  if (d >= 3) {
    ok = m >= first_exponent(d) && m < 1.0;
    range = "[m_1, 1) with m_1 = " + std::to_string(first_exponent(d));
  } else if (d == 2) {
    ok = m > 0.5 && m < 1.0;
    range = "(1/2, 1)";
  } else if (d == 1) {
    ok = m > 1.0 / 3.0 && m < 1.0;
    range = "(1/3, 1)";
  }
  if (!ok) {
    throw InvalidArgument("hardy_poincare: m = " + std::to_string(m) + " outside " + range +
                          " for d = " + std::to_string(d));
  }
}

inline SectorOperator assemble_sector(int d, double m, int ell, const GridPtr& grid) {
  if (!grid || grid->dim() != d) throw InvalidArgument("assemble_sector: grid dimension differs from d");
  require_hardy_poincare_range(d, m);
  if (ell < 0) throw InvalidArgument("assemble_sector: ell must be >= 0");
  if (d == 1 && ell > 1) throw InvalidArgument("assemble_sector: d = 1 has only the sectors ell = 0, 1");

  const auto r = grid->nodes();
  const std::size_t n = r.size();
  const double s = grid->surface_factor();
  const double ke = m * (1.0 - m) * s;
  const double me = 0.5 * m * s;
  const double cf = ell * (ell + d - 2.0);
  const double e = 1.0 / (m - 1.0);
  const auto rule = detail::gauss_legendre(6);

  SectorOperator op{d, m, ell, grid, std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                    std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), {}};
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double a = r[k], b = r[k + 1], h = b - a;
    double stiff = 0.0, ml = 0.0, mr = 0.0, cl = 0.0, cr = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double t = 0.5 * (rule.nodes[q] + 1.0);
      const double x = a + t * h;
      const double wq = 0.5 * h * rule.weights[q];
      const double bx = std::pow(1.0 + x * x, e);
      const double rd = std::pow(x, d - 1);
      stiff += wq * bx * rd;
      const double mw = wq * std::pow(bx, 2.0 - m) * rd;
      ml += mw * (1.0 - t);
      mr += mw * t;
      if (cf != 0.0) {
        const double cw = wq * bx * std::pow(x, d - 3);
        cl += cw * (1.0 - t);
        cr += cw * t;
      }
    }
    stiff *= ke / (h * h);
    op.stiff_diag[k] += stiff;
    op.stiff_diag[k + 1] += stiff;
    op.stiff_off[k] -= stiff;
    op.mass_form[k] += me * ml;
    op.mass_form[k + 1] += me * mr;
    op.centrifugal[k] += ke * cf * cl;
    op.centrifugal[k + 1] += ke * cf * cr;
  }
  if (ell > 0) op.centrifugal[0] = 0.0;
  if (ell == 0) op.constraints.push_back(op.mass_form);
  return op;
}

namespace detail {

/// Shifted inverse iteration for A w = lambda M w restricted to C^T w = 0,
/// each step solving the bordered system through its Schur complement.
class ConstrainedInverseIteration {
 public:
  ConstrainedInverseIteration(const SectorOperator& op, std::vector<LinearConstraint> cons)
      : op_(op), first_(op.first()), n_(op.size() - op.first()), cons_(std::move(cons)) {}

  double solve(std::size_t max_iter) {
    Eigen::VectorXd w(n_);
    for (std::size_t i = 0; i < n_; ++i) w[i] = 1.0 + 0.5 * std::sin(0.37 * i) + 1e-3 * i;
    factor(-1.0);
    w = project(w);
    double lambda = quotient(w);
    bool refined = false;
    int settled = 0;
    for (std::size_t it = 0; it < max_iter; ++it) {
      w = apply_inverse(op_mass(w));
      w /= std::sqrt(w.dot(op_mass(w)));
      const double next = quotient(w);
      const double change = std::abs(next - lambda) / std::max(1.0, std::abs(next));
      lambda = next;
      if (!refined && change < 1e-6) {
        factor(lambda * (1.0 - 1e-2));
        refined = true;
        settled = 0;
        continue;
      }
      settled = change < 1e-12 ? settled + 1 : 0;
      if (refined && settled >= 2) {
        vector_.assign(op_.size(), 0.0);
        for (std::size_t i = 0; i < n_; ++i) vector_[first_ + i] = w[i];
        return lambda;
      }
    }
    throw EigensolverNonconvergence("hardy_poincare_gap: inverse iteration did not converge in " +
                                    std::to_string(max_iter) + " iterations");
  }

  const std::vector<double>& eigenvector() const { return vector_; }

 private:
  Eigen::VectorXd op_mass(const Eigen::VectorXd& w) const {
    Eigen::VectorXd out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = op_.mass_form[first_ + i] * w[i];
    return out;
  }

  double quotient(const Eigen::VectorXd& w) const {
    std::vector<double> full(op_.size(), 0.0);
    for (std::size_t i = 0; i < n_; ++i) full[first_ + i] = w[i];
    return op_.rayleigh_quotient(full);
  }

  void factor(double shift) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(3 * n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t g = first_ + i;
      const auto ii = static_cast<Eigen::Index>(i);
      trip.emplace_back(ii, ii, op_.stiff_diag[g] + op_.centrifugal[g] - shift * op_.mass_form[g]);
      if (i + 1 < n_) {
        trip.emplace_back(ii, ii + 1, op_.stiff_off[g]);
        trip.emplace_back(ii + 1, ii, op_.stiff_off[g]);
      }
    }
    Eigen::SparseMatrix<double> k(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    k.setFromTriplets(trip.begin(), trip.end());
    lu_.compute(k);
    if (lu_.info() != Eigen::Success) {
      throw EigensolverNonconvergence("hardy_poincare_gap: shifted operator is singular");
    }
    const auto nc = static_cast<Eigen::Index>(cons_.size());
    c_.resize(static_cast<Eigen::Index>(n_), nc);
    for (Eigen::Index j = 0; j < nc; ++j) {
      for (std::size_t i = 0; i < n_; ++i) c_(static_cast<Eigen::Index>(i), j) = cons_[j][first_ + i];
    }
    kc_ = Eigen::MatrixXd(static_cast<Eigen::Index>(n_), nc);
    for (Eigen::Index j = 0; j < nc; ++j) kc_.col(j) = lu_.solve(Eigen::VectorXd(c_.col(j)));
    if (nc > 0) schur_ = (c_.transpose() * kc_).fullPivLu();
  }

  Eigen::VectorXd apply_inverse(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd z = lu_.solve(rhs);
    if (c_.cols() > 0) z -= kc_ * schur_.solve(c_.transpose() * z);
    return z;
  }

  Eigen::VectorXd project(const Eigen::VectorXd& w) const {
    if (c_.cols() == 0) return w;
    const Eigen::MatrixXd g = c_.transpose() * c_;
    return w - c_ * g.fullPivLu().solve(c_.transpose() * w);
  }

  const SectorOperator& op_;
  std::size_t first_;
  std::size_t n_;
  std::vector<LinearConstraint> cons_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  Eigen::MatrixXd c_, kc_;
  Eigen::FullPivLU<Eigen::MatrixXd> schur_;
  std::vector<double> vector_;
};

}  // namespace detail

struct GapResult {
  double lambda = 0.0;
  std::vector<double> eigenvector;
};

/// Smallest constrained generalized eigenvalue with its eigenvector.
inline GapResult hardy_poincare_eigenpair(const SectorOperator& op,
                                          const std::vector<LinearConstraint>& extra_constraints = {}) {
  auto cons = op.constraints;
  for (const auto& c : extra_constraints) {
    if (c.size() != op.size()) throw InvalidArgument("hardy_poincare_gap: constraint length does not match the grid");
    cons.push_back(c);
  }
  detail::ConstrainedInverseIteration solver(op, std::move(cons));
  const double lambda = solver.solve(500);
  return {lambda, solver.eigenvector()};
}

/// Smallest generalized eigenvalue lambda of the sector (alpha = lambda / 4).
inline double hardy_poincare_gap(const SectorOperator& op,
                                 const std::vector<LinearConstraint>& extra_constraints = {}) {
  return hardy_poincare_eigenpair(op, extra_constraints).lambda;
}

struct GapReport {
  int d = 0;
  double m = 0.0;
  int ell = 0;
  double lambda = 0.0;
  double alpha_est = 0.0;
  bool constrained = false;

  nlohmann::json to_json() const {
    return {{"d", d}, {"m", m}, {"ell", ell}, {"lambda", lambda}, {"alpha_est", alpha_est},
            {"constrained", constrained}};
  }
};

struct GapScan {
  std::vector<GapReport> sectors;
  GapReport unconstrained;  // minimum over all sectors
  GapReport centered;       // minimum with ell = 1 removed
};

/// Solves sectors 0..ell_max concurrently; d = 1 has only ell = 0, 1.
inline GapScan hardy_poincare_scan(int d, double m, const GridPtr& grid, int ell_max = 4) {
  require_hardy_poincare_range(d, m);
  if (ell_max < 2 && d > 1) throw InvalidArgument("hardy_poincare_scan: ell_max must be >= 2");
  const int top = d == 1 ? 1 : ell_max;
  std::vector<std::future<GapReport>> jobs;
  for (int ell = 0; ell <= top; ++ell) {
    jobs.push_back(std::async(std::launch::async, [=] {
      const auto op = assemble_sector(d, m, ell, grid);
      const double lambda = hardy_poincare_gap(op);
      return GapReport{d, m, ell, lambda, lambda / 4.0, ell == 0};
    }));
  }
  GapScan scan;
  for (auto& j : jobs) scan.sectors.push_back(j.get());
  const auto pick = [&](bool skip_one) {
    std::optional<GapReport> best;
    for (const auto& s : scan.sectors) {
      if (skip_one && s.ell == 1) continue;
      if (!best || s.lambda < best->lambda) best = s;
    }
    return *best;
  };
  scan.unconstrained = pick(false);
  scan.centered = pick(true);
  scan.centered.constrained = true;
  return scan;
}

/// Grid used by the gap experiments.
inline GridPtr spectrum_grid(int d, std::size_t n = 4000, double r_max = 200.0) {
  return make_grid(d, r_max, n);
}

}  // namespace ineqlab
