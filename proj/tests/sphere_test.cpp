#include "ineqlab/sphere.hpp"

#include "ineqlab/families.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

namespace ineqlab {
namespace {

double bump(double y) { return smooth_bump(y); }
double dbump(double y) { return smooth_bump_derivative(y); }

TEST(ZonalGrid, QuadratureIsAProbabilityMeasureWithKnownMoments) {
  for (int d : {1, 2, 3, 4, 7, 64}) {
    const auto g = ZonalGrid::make(d, 48);
    double total = 0.0;
    for (double w : g->weights()) total += w;
    EXPECT_NEAR(total, 1.0, 1e-12) << "d = " << d;
    std::vector<double> x2(g->size()), x4(g->size());
    for (std::size_t i = 0; i < g->size(); ++i) {
      const double x = g->xs()[i];
      EXPECT_GT(x, -1.0);
      EXPECT_LT(x, 1.0);
      x2[i] = x * x;
      x4[i] = x * x * x * x;
    }
    EXPECT_NEAR(g->integrate(x2), 1.0 / (d + 1.0), 1e-10) << "d = " << d;
    EXPECT_NEAR(g->integrate(x4), 3.0 / ((d + 1.0) * (d + 3.0)), 1e-10) << "d = " << d;
  }
}

TEST(ZonalGrid, LaplacianHasHarmonicEigenvalues) {
  const int d = 3;
  const auto g = ZonalGrid::make(d, 32);
  const auto f = ZonalProfile::sample(g, [](double t) { return 4.0 * std::cos(t) * std::cos(t) - 1.0; });
  const Eigen::Map<const Eigen::VectorXd> v(f.values.data(), static_cast<Eigen::Index>(f.values.size()));
  const Eigen::VectorXd lv = g->laplacian() * v;
  for (Eigen::Index i = 0; i < v.size(); ++i) EXPECT_NEAR(lv[i], -2.0 * (2 + d - 1) * v[i], 1e-9);
}

TEST(SphereEnergy, ConstantsHaveNoEnergy) {
  const auto g = ZonalGrid::make(3);
  EXPECT_NEAR(sphere_energy(ZonalProfile::sample(g, [](double) { return 2.5; })), 0.0, 1e-20);
}

TEST(SphereEnergy, FirstHarmonicRayleighQuotientIsDimension) {
  for (int d : {1, 2, 3, 5, 8}) {
    const auto f = ZonalProfile::sample(ZonalGrid::make(d), [](double t) { return std::cos(t); });
    EXPECT_NEAR(sphere_energy(f) / detail::zonal_norm2(f), d, 1e-11) << "d = " << d;
  }
  const auto f = ZonalProfile::sample(ZonalGrid::make(3), [](double t) { return std::cos(t); });
  EXPECT_NEAR(detail::zonal_norm2(f), 0.25, 1e-14);
  EXPECT_NEAR(sphere_energy(f), 0.75, 1e-12);
}

TEST(SphereEnergy, SuppliedDerivativeMatchesDifferentiationMatrix) {
  const auto g = ZonalGrid::make(3, 48);
  const auto fn = [](double t) { return std::exp(0.4 * std::cos(t)); };
  const auto dfn = [](double t) { return -0.4 * std::sin(t) * std::exp(0.4 * std::cos(t)); };
  EXPECT_NEAR(sphere_energy(ZonalProfile::sample(g, fn)), sphere_energy(ZonalProfile::sample(g, fn, dfn)), 1e-13);
}

TEST(EpFunctional, VanishesOnConstants) {
  const auto f = ZonalProfile::sample(ZonalGrid::make(3), [](double) { return 1.7; });
  for (double p : {1.0, 1.5, 2.0, 3.0, 4.0, 6.0}) EXPECT_NEAR(ep_functional(f, p), 0.0, 1e-15) << "p = " << p;
}

TEST(EpFunctional, ContinuousAtTwo) {
  const auto f = ZonalProfile::sample(ZonalGrid::make(3), [](double t) { return 1.0 + 0.3 * std::cos(t); });
  const double e2 = ep_functional(f, 2.0);
  EXPECT_GT(e2, 0.0);
  EXPECT_LE(std::abs(ep_functional(f, 2.0 + 1e-4) - e2), 1e-3 * std::abs(e2));
  EXPECT_LE(std::abs(ep_functional(f, 2.0 - 1e-4) - e2), 1e-3 * std::abs(e2));
}

TEST(EpFunctional, SecondOrderTaylorCoefficient) {
  const int d = 3;
  const auto g = ZonalGrid::make(d);
  for (double p : {1.5, 2.0, 4.0}) {
    std::vector<double> err;
    for (double eps : {1e-2, 1e-3}) {
      const auto f = ZonalProfile::sample(g, [eps](double t) { return 1.0 + eps * std::cos(t); });
      err.push_back(std::abs(ep_functional(f, p) / (eps * eps) - 1.0 / (d + 1.0)));
    }
    EXPECT_LT(err[1], 0.2 * err[0] + 1e-9) << "p = " << p;
    EXPECT_LT(err[1], 1e-3) << "p = " << p;
  }
}

TEST(EpFunctional, RejectsInadmissibleExponents) {
  const auto f = ZonalProfile::sample(ZonalGrid::make(3), [](double) { return 1.0; });
  EXPECT_THROW(ep_functional(f, 0.5), InvalidArgument);
  EXPECT_THROW(ep_functional(f, 6.5), InvalidArgument);
  EXPECT_THROW(ep_functional(f, std::numeric_limits<double>::infinity()), InvalidArgument);
  EXPECT_NO_THROW(ep_functional(f, 6.0));
  const auto f2 = ZonalProfile::sample(ZonalGrid::make(2), [](double) { return 1.0; });
  EXPECT_NO_THROW(ep_functional(f2, 20.0));
}

TEST(Projection, IdempotentAndOrthogonal) {
  const auto g = ZonalGrid::make(3);
  const auto f = ZonalProfile::sample(g, [](double t) { return std::exp(std::cos(t)) + 0.3 * std::sin(2.0 * t); });
  const auto p1 = project_first_harmonic(f);
  const auto p11 = project_first_harmonic(p1);
  for (std::size_t i = 0; i < g->size(); ++i) EXPECT_NEAR(p11.values[i], p1.values[i], 1e-12);
  const auto rest = subtract(f, p1);
  std::vector<double> prod(g->size());
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = p1.values[i] * rest.values[i];
  EXPECT_NEAR(g->integrate(prod), 0.0, 1e-10);
}

TEST(SphereDeficit, ConstantsAreExtremal) {
  const auto f = ZonalProfile::sample(ZonalGrid::make(3), [](double) { return 1.0; });
  const auto rep = sphere_deficit(f, 4.0);
  EXPECT_NEAR(rep.deficit, 0.0, 1e-15);
  EXPECT_NEAR(rep.distance, 0.0, 1e-20);
  EXPECT_FALSE(rep.quotient.has_value());
}

TEST(SphereDeficit, FirstHarmonicDirectionIsQuarticallyDegenerate) {
  const auto g = ZonalGrid::make(3);
  const auto eps = logspace(1e-3, 1e-2, 8);
  std::vector<double> def, stab, quot;
  for (double e : eps) {
    const auto rep = sphere_deficit(ZonalProfile::sample(g, [e](double t) { return 1.0 + e * std::cos(t); }), 4.0);
    def.push_back(rep.deficit);
    stab.push_back(rep.distance);
    ASSERT_TRUE(rep.quotient.has_value());
    quot.push_back(*rep.quotient);
  }
  EXPECT_NEAR(loglog_slope(eps, def), 4.0, 0.1);
  EXPECT_NEAR(loglog_slope(eps, stab), 4.0, 0.1);
  const auto [qmin, qmax] = std::minmax_element(quot.begin(), quot.end());
  EXPECT_GT(*qmin, 0.0);
  EXPECT_LT(*qmax, 2.0 * *qmin);
}

TEST(SphereDeficit, SecondHarmonicDirectionIsQuadratic) {
  const int d = 3;
  const auto g = ZonalGrid::make(d);
  const auto eps = logspace(1e-3, 1e-2, 8);
  std::vector<double> def, quot;
  for (double e : eps) {
    const auto rep = sphere_deficit(ZonalProfile::sample(g, [e](double t) {
                                      return 1.0 + e * ((d + 1.0) * std::cos(t) * std::cos(t) - 1.0);
                                    }),
                                    4.0);
    def.push_back(rep.deficit);
    quot.push_back(*rep.quotient);
  }
  EXPECT_NEAR(loglog_slope(eps, def), 2.0, 0.05);
  EXPECT_GT(*std::min_element(quot.begin(), quot.end()), 0.1);
}

TEST(SphereDeficit, NonnegativeOnRandomPositiveProfiles) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const auto g = ZonalGrid::make(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(5);
    for (auto& x : a) x = coef(rng);
    double amp = 0.0;
    for (std::size_t k = 1; k < a.size(); ++k) amp += std::abs(a[k]);
    const double scale = 0.9 / amp * std::abs(coef(rng));
    const auto f = ZonalProfile::sample(g, [&](double t) {
      double s = 1.0;
      for (std::size_t k = 1; k < a.size(); ++k) s += scale * a[k] * std::cos(static_cast<double>(k) * t);
      return s;
    });
    for (double p : {1.5, 2.0, 3.0, 4.0}) {
      const auto rep = sphere_deficit(f, p);
      EXPECT_GE(rep.deficit, -1e-12) << "trial " << trial << ", p = " << p;
    }
  }
}

TEST(SphereSobolev, ConstantsAndPositivity) {
  const auto g = ZonalGrid::make(3);
  EXPECT_NEAR(sphere_sobolev_deficit(ZonalProfile::sample(g, [](double) { return 1.0; })).deficit, 0.0, 1e-15);
  const auto f = ZonalProfile::sample(g, [](double t) { return 1.0 + 0.1 * std::cos(t); });
  const auto rep = sphere_sobolev_deficit(f);
  EXPECT_GT(rep.deficit, 0.0);
  EXPECT_EQ(rep.metadata.at("distance"), "restricted to constant functions");
}

TEST(SphereSobolev, CoincidesWithCriticalGnsDeficit) {
  for (int d : {3, 4, 5}) {
    const auto f = ZonalProfile::sample(ZonalGrid::make(d), [](double t) { return 1.0 + 0.2 * std::cos(t) + 0.1 * std::cos(2 * t); });
    EXPECT_NEAR(sphere_sobolev_deficit(f).deficit, sphere_deficit(f, sphere_critical_exponent(d)).deficit, 1e-14);
  }
  EXPECT_THROW(sphere_sobolev_deficit(ZonalProfile::sample(ZonalGrid::make(2), [](double) { return 1.0; })),
               InvalidArgument);
}

TEST(MExponents, DisplayedValues) {
  const auto [lo, hi] = m_exponents(3, 4.0);
  EXPECT_NEAR(lo, (14.0 - std::sqrt(18.0)) / 20.0, 1e-15);
  EXPECT_NEAR(hi, (14.0 + std::sqrt(18.0)) / 20.0, 1e-15);
  EXPECT_NEAR(lo, 0.48787, 5e-6);
  EXPECT_NEAR(hi, 0.91213, 5e-6);
  for (int d : {2, 3, 5}) {
    const auto [a, b] = m_exponents(d, 1.0);
    EXPECT_DOUBLE_EQ(a, 1.0);
    EXPECT_DOUBLE_EQ(b, 1.0);
  }
  for (int d : {3, 4}) {
    const auto [a, b] = m_exponents(d, sphere_critical_exponent(d));
    EXPECT_NEAR(a, (d - 1.0) / d, 1e-10);
    EXPECT_NEAR(b, (d - 1.0) / d, 1e-10);
  }
  EXPECT_THROW(m_exponents(3, 7.0), InvalidArgument);
}

TEST(SphereFlow, ConstantIsStationary) {
  const auto f0 = ZonalProfile::sample(ZonalGrid::make(3, 32), [](double) { return 1.0; });
  FlowConfig cfg;
  cfg.dt = 1e-2;
  cfg.t_end = 0.5;
  cfg.keep_profiles = true;
  const auto tr = sphere_flow(f0, 4.0, 0.7, cfg);
  for (double v : tr.profiles.back()) EXPECT_NEAR(v, 1.0, 1e-12);
  EXPECT_NEAR(tr.deficit.back(), 0.0, 1e-14);
}

TEST(SphereFlow, DeficitMonotoneAcrossAdmissibleExponents) {
  const auto f0 = ZonalProfile::sample(ZonalGrid::make(3, 32), [](double t) { return 1.0 + 0.2 * std::cos(t); });
  const auto [lo, hi] = m_exponents(3, 4.0);
  FlowConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 3.0;
  for (const Scheme s : {Scheme::SemiImplicit, Scheme::ImplicitNewton}) {
    cfg.scheme = s;
    for (double m : {lo, 0.5 * (lo + hi), hi, 0.7}) {
      const auto tr = sphere_flow(f0, 4.0, m, cfg);
      EXPECT_TRUE(deficit_nonincreasing(tr, 1e-12 * tr.deficit.front())) << "m = " << m << ", " << to_string(s);
      EXPECT_LT(tr.deficit.back(), 1e-10 * tr.deficit.front());
      EXPECT_GE(sphere_decay_rate(tr, 1.0, 3.0), 3.0 * 0.95) << "m = " << m;
    }
  }
}

TEST(SphereFlow, ImplicitSchemeConservesPMass) {
  const auto f0 = ZonalProfile::sample(ZonalGrid::make(3, 32), [](double t) { return 1.0 + 0.2 * std::cos(t); });
  FlowConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;
  cfg.scheme = Scheme::ImplicitNewton;
  const auto tr = sphere_flow(f0, 4.0, 0.7, cfg);
  EXPECT_LT(std::abs(tr.mass.back() / tr.mass.front() - 1.0), 1e-5);
}

TEST(SphereFlow, RejectsBadInputs) {
  const auto g = ZonalGrid::make(3, 32);
  FlowConfig cfg;
  const auto f0 = ZonalProfile::sample(g, [](double t) { return 1.0 + 0.2 * std::cos(t); });
  EXPECT_THROW(sphere_flow(ZonalProfile::sample(g, [](double t) { return std::cos(t); }), 4.0, 0.7, cfg),
               InvalidArgument);
  EXPECT_THROW(sphere_flow(f0, 4.0, 0.95, cfg), InvalidArgument);
  EXPECT_THROW(sphere_flow(f0, 4.0, 0.45, cfg), InvalidArgument);
}

TEST(SphereFlow, CsvHeader) {
  const auto f0 = ZonalProfile::sample(ZonalGrid::make(3, 16), [](double t) { return 1.0 + 0.2 * std::cos(t); });
  FlowConfig cfg;
  cfg.dt = 1e-2;
  cfg.t_end = 0.1;
  std::ostringstream os;
  sphere_flow(f0, 4.0, 0.7, cfg).write_csv(os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "t,mass,deficit,E_p");
}

TEST(LargeD, ZeroProfileGivesZeros) {
  const auto rows = large_d_limit_check([](double) { return 0.0; }, [](double) { return 0.0; }, 1.0, 1.5,
                                        {8, 16, 32, 64});
  for (const auto& r : rows) {
    EXPECT_FALSE(r.skipped);
    EXPECT_EQ(r.difference, 0.0);
  }
}

TEST(LargeD, ConstantProfileEmbedsAsConstant) {
  const auto rows = large_d_limit_check([](double) { return 2.0; }, [](double) { return 0.0; }, 1.0, 1.5, {8, 32});
  for (const auto& r : rows) {
    EXPECT_NEAR(r.sphere_deficit, 0.0, 1e-14);
    EXPECT_NEAR(r.gaussian_value, 0.0, 1e-12);
  }
}

TEST(LargeD, DifferencesDecreaseWithDimension) {
  const auto wide = [](double y) { return bump(y / 0.9); };
  const auto dwide = [](double y) { return dbump(y / 0.9) / 0.9; };
  const auto shifted = [](double y) { return bump(y) * (1.0 + 0.5 * y); };
  const auto dshifted = [](double y) { return dbump(y) * (1.0 + 0.5 * y) + 0.5 * bump(y); };
  for (const auto& [v, dv] : {std::pair{std::function<double(double)>(wide), std::function<double(double)>(dwide)},
                              std::pair{std::function<double(double)>(shifted), std::function<double(double)>(dshifted)}}) {
    const auto rows = large_d_limit_check(v, dv, 1.0, 1.5, {8, 16, 32, 64});
    for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_LT(rows[k].difference, rows[k - 1].difference);
    EXPECT_LT(rows.back().difference, 0.1 * std::abs(rows.back().gaussian_value));
  }
}

TEST(LargeD, SupportBeyondChartIsSkipped) {
  const auto rows = large_d_limit_check(bump, dbump, 1.5, 1.5, {8, 16});
  EXPECT_TRUE(rows[0].skipped);
  EXPECT_FALSE(rows[1].skipped);
  EXPECT_THROW(large_d_limit_check(bump, dbump, 1.0, 2.0, {8}), InvalidArgument);
}

}  // namespace
}  // namespace ineqlab
