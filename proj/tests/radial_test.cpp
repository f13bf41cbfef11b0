#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "ineqlab/radial.hpp"
#include "oracles.hpp"

using namespace ineqlab;
using ineqlab::test::beta_radial_integral;

namespace {

double g_star(double r) { return 1.0 / std::sqrt(1.0 + r * r); }

}  // namespace

TEST(RadialGrid, RejectsBadArguments) {
  EXPECT_THROW(make_grid(3, 1.0, 63), InvalidArgument);
  EXPECT_THROW(make_grid(3, 0.0, 64), InvalidArgument);
  EXPECT_THROW(make_grid(0, 1.0, 64), InvalidArgument);
}

TEST(RadialGrid, UniformGridIntegratesCubic) {
  auto g = make_grid(3, 1.0, 64, 1.0);
  double s = 0.0;
  for (std::size_t i = 0; i < g->size(); ++i) s += g->weights()[i] * g->nodes()[i] * g->nodes()[i];
  EXPECT_NEAR(s, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(g->nodes()[1], 1.0 / 64.0, 1e-15);
}

TEST(RadialGrid, PlainWeightsSumToLength) {
  auto g = make_grid(1, 2.0, 128, 1.0);
  double s = 0.0;
  for (double w : g->weights()) s += w;
  EXPECT_NEAR(s, 2.0, 1e-12);
}

TEST(RadialGrid, GradedGridMonomials) {
  auto g = make_grid(3, 50.0, 1024, 2.0);
  double s = 0.0;
  for (std::size_t i = 0; i < g->size(); ++i) s += g->weights()[i] * g->nodes()[i] * g->nodes()[i];
  EXPECT_NEAR(s / (50.0 * 50.0 * 50.0 / 3.0), 1.0, 1e-9);
  // Node density ~ 1/sqrt(r): spacing grows like sqrt(r).
  const auto r = g->nodes();
  EXPECT_NEAR((r[401] - r[400]) / (r[101] - r[100]), 4.0, 0.02);
}

TEST(RadialGrid, MonomialExactnessOnAnyGrading) {
  for (double grading : {1.0, 1.5, 2.0, 3.0}) {
    for (int d : {1, 2, 3, 5}) {
      auto g = make_grid(d, 3.0, 97, grading);
      for (int k = 0; k <= 3; ++k) {
        double plain = 0.0;
        for (std::size_t i = 0; i < g->size(); ++i) plain += g->weights()[i] * std::pow(g->nodes()[i], k);
        const double exact = std::pow(3.0, k + 1) / (k + 1);
        EXPECT_NEAR(plain / exact, 1.0, 1e-12) << "k=" << k << " grading=" << grading;
        std::vector<double> phi(g->size());
        for (std::size_t i = 0; i < g->size(); ++i) phi[i] = std::pow(g->nodes()[i], k);
        const double meas = g->integrate(phi);
        const double exact_meas = std::pow(3.0, k + d) / (k + d);
        EXPECT_NEAR(meas / exact_meas, 1.0, 1e-12);
      }
    }
  }
}

TEST(RadialCore, LpNormOfGStarMatchesBetaOracle) {
  auto g = make_grid(3, 200.0, 1024);
  auto f = RadialProfile::sample(g, g_star, 1.0);
  const double expected = 4.0 * std::numbers::pi * beta_radial_integral(3, 3.0);
  EXPECT_NEAR(expected, std::numbers::pi * std::numbers::pi / 4.0, 1e-12);
  EXPECT_NEAR(lp_integral(f, 6.0) / expected, 1.0, 2e-6);
  auto fine = RadialProfile::sample(make_grid(3, 200.0, 2048), g_star, 1.0);
  EXPECT_LT(std::abs(lp_integral(fine, 6.0) / expected - 1.0),
            std::abs(lp_integral(f, 6.0) / expected - 1.0) / 8.0);
}

TEST(RadialCore, LpNormZeroAndHomogeneity) {
  auto g = make_grid(3, 50.0, 256);
  auto zero = RadialProfile::sample(g, [](double) { return 0.0; }, 1.0);
  EXPECT_EQ(lp_norm(zero, 6.0), 0.0);
  auto f = RadialProfile::sample(g, g_star, 1.0);
  for (double lambda : {-2.5, 0.3, 7.0}) {
    EXPECT_NEAR(lp_norm(f.scaled(lambda), 6.0), std::abs(lambda) * lp_norm(f, 6.0),
                1e-13 * std::abs(lambda) * lp_norm(f, 6.0));
  }
}

TEST(RadialCore, LpNormTailDivergence) {
  auto g = make_grid(3, 50.0, 128);
  auto f = RadialProfile::sample(g, g_star, 1.0);
  EXPECT_THROW(lp_norm(f, 2.0), TailDivergence);
  EXPECT_THROW(lp_norm(f, 3.0), TailDivergence);
  EXPECT_THROW(lp_norm(f, 0.0), InvalidArgument);
}

TEST(RadialCore, BarenblattMassOneDimension) {
  auto g = make_grid(1, 200.0, 1024);
  auto b = RadialProfile::sample(g, [](double r) { return std::pow(1.0 + r * r, -2.0); }, 4.0);
  EXPECT_NEAR(lp_norm(b, 1.0), std::numbers::pi / 2.0, 1e-9);
}

TEST(RadialCore, DirichletEnergyOfGStar) {
  auto g = make_grid(3, 200.0, 1024);
  auto f = RadialProfile::sample(g, g_star, 1.0);
  const double expected = 3.0 * std::numbers::pi * std::numbers::pi / 4.0;
  EXPECT_NEAR(dirichlet_energy(f) / expected, 1.0, 1e-6);
}

TEST(RadialCore, DirichletEnergyConstantAndGaussian) {
  auto g = make_grid(1, 12.0, 512);
  auto c = RadialProfile::sample(g, [](double) { return 2.0; });
  EXPECT_NEAR(dirichlet_energy(c), 0.0, 1e-20);
  auto gauss = RadialProfile::sample(g, [](double r) { return std::exp(-r * r / 2.0); });
  EXPECT_NEAR(dirichlet_energy(gauss), std::sqrt(std::numbers::pi) / 2.0, 1e-8);
}

TEST(RadialCore, DifferentiateExamples) {
  auto g = make_grid(3, 4.0, 128);
  auto sq = RadialProfile::sample(g, [](double r) { return r * r; });
  auto dsq = differentiate(sq);
  for (std::size_t i = 0; i < g->size(); ++i) EXPECT_NEAR(dsq[i], 2.0 * g->nodes()[i], 1e-10);
  auto c = RadialProfile::sample(g, [](double) { return 3.0; });
  const auto dc = differentiate(c);
  for (double v : dc.values()) EXPECT_NEAR(v, 0.0, 1e-10);

  // r = 1 is node 64 of this grid.
  auto g2 = make_grid(3, 256.0, 1024, 2.0);
  auto f = RadialProfile::sample(g2, g_star, 1.0);
  auto df = differentiate(f);
  const auto r = g2->nodes();
  const auto it = std::lower_bound(r.begin(), r.end(), 1.0);
  const std::size_t i = static_cast<std::size_t>(it - r.begin());
  EXPECT_NEAR(r[i], 1.0, 1e-12);
  EXPECT_NEAR(df[i], -1.0 / (2.0 * std::sqrt(2.0)), 1e-4);
}

TEST(RadialCore, DifferentiationConvergesAtLeastSecondOrder) {
  auto err = [](std::size_t n) {
    auto g = make_grid(2, 5.0, n);
    auto f = RadialProfile::sample(g, [](double r) { return std::exp(-r * r) * std::cos(r); });
    auto df = differentiate(f);
    std::vector<double> e(g->size());
    for (std::size_t i = 0; i < g->size(); ++i) {
      const double r = g->nodes()[i];
      const double exact = std::exp(-r * r) * (-2.0 * r * std::cos(r) - std::sin(r));
      e[i] = (df[i] - exact) * (df[i] - exact);
    }
    return std::sqrt(g->integrate(e));
  };
  const double e1 = err(128);
  const double e2 = err(256);
  EXPECT_GE(std::log2(e1 / e2), 2.0);
}

TEST(RadialCore, EntropyIntegralExamples) {
  auto g = make_grid(1, 1.0, 64, 1.0);
  auto one = RadialProfile::sample(g, [](double) { return 1.0; });
  EXPECT_NEAR(entropy_integral(one), 0.0, 1e-15);
  // f^2 = e on the line segment [-1, 1]: the radial convention in d = 1
  // integrates over both half-lines.
  auto ee = RadialProfile::sample(g, [](double) { return std::sqrt(std::exp(1.0)); });
  EXPECT_NEAR(entropy_integral(ee), 2.0 * std::exp(1.0), 1e-12);

  auto g12 = make_grid(1, 12.0, 512);
  auto gauss = RadialProfile::sample(
      g12, [](double x) { return std::pow(std::numbers::pi, -0.25) * std::exp(-x * x / 2.0); });
  EXPECT_NEAR(entropy_integral(gauss), -0.5 * (1.0 + std::log(std::numbers::pi)), 1e-9);
}

TEST(RadialCore, DirichletEnergyScaling) {
  // f_lambda(r) = f(lambda r) on the grid rescaled by 1/lambda.
  const int d = 3;
  for (double lambda : {0.5, 2.0}) {
    auto g = make_grid(d, 100.0, 1024);
    auto gl = make_grid(d, 100.0 / lambda, 1024);
    auto f = RadialProfile::sample(g, [](double r) { return std::pow(1.0 + r * r, -1.5); }, 3.0);
    auto fl = RadialProfile::sample(
        gl, [lambda](double r) { return std::pow(1.0 + lambda * lambda * r * r, -1.5); }, 3.0);
    EXPECT_NEAR(dirichlet_energy(fl) / (std::pow(lambda, 2.0 - d) * dirichlet_energy(f)), 1.0,
                1e-6);
  }
}

TEST(RadialCore, RandomizedHomogeneityProperty) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  auto g = make_grid(4, 30.0, 200);
  auto f = RadialProfile::sample(g, [](double r) { return std::pow(1.0 + r * r, -1.0); }, 2.0);
  for (int t = 0; t < 50; ++t) {
    const double lambda = u(rng);
    const double p = 2.5 + std::abs(u(rng));
    EXPECT_NEAR(lp_norm(f.scaled(lambda), p), std::abs(lambda) * lp_norm(f, p),
                1e-12 * (1.0 + std::abs(lambda)));
  }
}
