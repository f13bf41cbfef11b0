#pragma once

// Small numerical kernels shared by the modules: Gauss-Legendre rules,
// finite-difference weights on arbitrary nodes, tridiagonal solves and
// golden-section search.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "ineqlab/error.hpp"

namespace ineqlab::detail {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1] (Newton on P_n).
inline QuadratureRule gauss_legendre(std::size_t n) {
  QuadratureRule rule;
  if (n == 1) return {{0.0}, {2.0}};
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0;
    double p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
      const double kk = static_cast<double>(k);
      const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
      p0 = p1;
      p1 = p2;
    }
    dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

/// Fornberg's algorithm: weights c[k][j] such that the k-th derivative at z
/// is approximated by sum_j c[k][j] f(x_j), for k = 0..max_order.
inline std::vector<std::vector<double>> fornberg_weights(double z, std::span<const double> x,
                                                         int max_order) {
  const std::size_t n = x.size();
  const auto m = static_cast<std::size_t>(max_order);
  std::vector<std::vector<double>> c(m + 1, std::vector<double>(n, 0.0));
  double c1 = 1.0;
  double c4 = x[0] - z;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (std::size_t k = mn; k >= 1; --k) {
          c[k][i] = c1 * (static_cast<double>(k) * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        }
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (std::size_t k = mn; k >= 1; --k) {
        c[k][j] = (c4 * c[k][j] - static_cast<double>(k) * c[k - 1][j]) / c3;
      }
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

/// Solves a tridiagonal system in place (Thomas algorithm). `lower[i]`
/// couples row i to i-1, `upper[i]` couples row i to i+1.
inline std::vector<double> solve_tridiagonal(std::span<const double> lower,
                                             std::span<const double> diag,
                                             std::span<const double> upper,
                                             std::span<const double> rhs) {
  const std::size_t n = diag.size();
  std::vector<double> c(n, 0.0);
  std::vector<double> x(n, 0.0);
  double beta = diag[0];
  x[0] = rhs[0] / beta;
  for (std::size_t i = 1; i < n; ++i) {
    c[i] = upper[i - 1] / beta;
    beta = diag[i] - lower[i] * c[i];
    x[i] = (rhs[i] - lower[i] * x[i - 1]) / beta;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i + 1] * x[i + 1];
  return x;
}

struct MinimumResult {
  double x = 0.0;
  double value = 0.0;
};

/// Golden-section search on [lo, hi] for a unimodal function.
inline MinimumResult golden_section(const std::function<double(double)>& f, double lo, double hi,
                                    double rel_tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 400; ++it) {
    if (std::abs(b - a) <= rel_tol * std::max(1.0, std::abs(c) + std::abs(d))) break;
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? MinimumResult{c, fc} : MinimumResult{d, fd};
}

/// Coarse scan followed by golden-section refinement around the best sample.
/// Ties in the scan resolve to the smallest abscissa. Throws when the best
/// sample sits on the bracket boundary.
inline MinimumResult scan_then_golden(const std::function<double(double)>& f, double lo,
                                      double hi, std::size_t samples, double rel_tol) {
  std::vector<double> values(samples);
  const double step = (hi - lo) / static_cast<double>(samples - 1);
  std::size_t best = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    values[i] = f(lo + step * static_cast<double>(i));
    if (values[i] < values[best]) best = i;
  }
  if (best == 0 || best == samples - 1) {
    throw OptimizationFailure("minimum lies on the boundary of the search bracket");
  }
  const double a = lo + step * static_cast<double>(best - 1);
  const double b = lo + step * static_cast<double>(best + 1);
  auto refined = golden_section(f, a, b, rel_tol);
  if (values[best] < refined.value) return {lo + step * static_cast<double>(best), values[best]};
  return refined;
}

/// Least-squares slope of y against x.
inline double least_squares_slope(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace ineqlab::detail
