// Acceptance report: one PASS/FAIL line per criterion, exit status 1 if any
// fails. Usage: acceptance <ineqlab binary> <suite config>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "ineqlab/families.hpp"
#include "ineqlab/flows.hpp"
#include "ineqlab/functionals.hpp"
#include "ineqlab/gaussian.hpp"
#include "ineqlab/spectrum.hpp"
#include "ineqlab/sphere.hpp"
#include "oracles.hpp"

namespace {

using namespace ineqlab;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool ok = true;
  std::ostringstream detail;

  void check(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double x) { return format_double(x); }

FlowConfig rfd_flow(double m) {
  FlowConfig c;
  c.m = m;
  c.dt = 1e-3;
  c.t_end = 5.0;
  c.scheme = Scheme::SemiImplicit;
  c.record_every = 20;
  return c;
}

struct RfdRun {
  double m;
  std::string label;
  FlowTrace trace;
  double seconds;
};

// The five decay runs shared by the decay, improved-rate and mass criteria.
const std::vector<RfdRun>& rfd_runs() {
  static const std::vector<RfdRun> runs = [] {
    std::vector<RfdRun> out;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto random_coeffs = [&] {
      std::array<double, 3> a{};
      for (auto& x : a) x = u(rng);
      return a;
    };
    struct Spec {
      double m;
      std::string label;
      std::function<RadialProfile(const GridPtr&)> make;
    };
    const auto a1 = random_coeffs();
    const auto a2 = random_coeffs();
    const std::vector<Spec> specs{
        {0.5, "m=0.5 dilated", [](const GridPtr& g) { return dilated_barenblatt(g, 0.5, 1.2); }},
        {0.5, "m=0.5 perturbed", [=](const GridPtr& g) { return perturbed_barenblatt(g, 0.5, 0.1, a1); }},
        {0.8, "m=0.8 dilated", [](const GridPtr& g) { return dilated_barenblatt(g, 0.8, 1.2); }},
        {0.8, "m=0.8 contracted", [](const GridPtr& g) { return dilated_barenblatt(g, 0.8, 0.8); }},
        {0.8, "m=0.8 perturbed", [=](const GridPtr& g) { return perturbed_barenblatt(g, 0.8, 0.1, a2); }},
    };
    for (const auto& s : specs) {
      const auto g = make_grid(1, s.m < 0.7 ? 200.0 : 60.0, 1024);
      const auto t0 = Clock::now();
      auto tr = run_rfd(s.make(g), rfd_flow(s.m));
      out.push_back({s.m, s.label, std::move(tr), seconds_since(t0)});
    }
    return out;
  }();
  return runs;
}

double late_rate(const FlowTrace& tr) {
  const double floor = 1e-9 * tr.free_energy.front();
  std::vector<double> t, y;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    if (tr.times[k] >= 1.0 && tr.times[k] <= 4.0 && tr.free_energy[k] > std::max(floor, 1e-11)) {
      t.push_back(tr.times[k]);
      y.push_back(-std::log(tr.free_energy[k]));
    }
  }
  if (t.size() < 5) return std::numeric_limits<double>::quiet_NaN();
  return ineqlab::detail::least_squares_slope(t, y);
}

Verdict sharp_constant() {
  Verdict v;
  for (int d : {3, 4, 5}) {
    const auto t0 = Clock::now();
    const double s = sobolev_constant(reference_grid(d));
    const double secs = seconds_since(t0);
    const double exact = test::sobolev_constant_closed_form(d);
    const double rel = std::abs(s / exact - 1.0);
    v.detail << " S_" << d << "=" << fmt(s) << " (rel " << fmt(rel) << ", " << fmt(secs) << " s)";
    v.check(rel <= 1e-3, "S_" + std::to_string(d) + " relative error");
    v.check(secs < 1.0, "S_" + std::to_string(d) + " runtime");
  }
  return v;
}

std::vector<DualityGap> duality_family(const std::vector<double>& eps, bool mode2) {
  const auto g = make_grid(3, 1000.0, 16384);
  std::vector<DualityGap> out;
  for (double e : eps) out.push_back(duality_gap(mode2 ? conformal_mode2(g, e) : perturbed_g_star(g, e)));
  return out;
}

const std::vector<double>& curated_eps() {
  static const std::vector<double> eps{0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
  return eps;
}

Verdict duality_identity() {
  Verdict v;
  std::vector<double> eps;
  for (double e : {-0.5, -0.3, -0.2, -0.1, -0.05, -0.02, -0.01}) eps.push_back(e);
  for (double e : {0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0}) eps.push_back(e);
  const auto t0 = Clock::now();
  const auto gaps = duality_family(eps, false);
  const double secs = seconds_since(t0);
  double worst_residual = 0.0, worst_gap = std::numeric_limits<double>::infinity();
  for (const auto& gp : gaps) {
    worst_residual = std::max(worst_residual, gp.residual);
    worst_gap = std::min(worst_gap, (gp.rhs - gp.lhs) / gp.scale);
  }
  v.detail << " profiles=" << gaps.size() << " min (R-L)/scale=" << fmt(worst_gap) << " max residual=" << fmt(worst_residual)
           << " runtime=" << fmt(secs) << " s";
  v.check(gaps.size() == 20, "20 profiles");
  v.check(worst_gap >= -1e-8, "L <= R");
  v.check(worst_residual <= 1e-8, "identity residual");
  v.check(secs < 10.0, "runtime");
  return v;
}

Verdict duality_interval() {
  Verdict v;
  const auto gaps = duality_family(curated_eps(), true);
  const double lower = 3.0 / 7.0;
  double c_est = -std::numeric_limits<double>::infinity();
  for (const auto& gp : gaps) {
    if (gp.ratio) c_est = std::max(c_est, *gp.ratio);
  }
  // Ratios along the curated family approach 3/7 linearly as eps -> 0.
  const double r0 = *gaps[0].ratio, r1 = *gaps[1].ratio;
  const double limit = r0 - (r1 - r0) * curated_eps()[0] / (curated_eps()[1] - curated_eps()[0]);
  v.detail << " profiles=" << gaps.size() << " C_est=" << fmt(c_est) << " eps->0 limit=" << fmt(limit);
  v.check(gaps.size() == 10, "10 profiles");
  v.check(c_est >= lower && c_est < 1.0, "C_est in [3/7, 1)");
  v.check(std::abs(limit - lower) <= 1e-3, "limit 3/7");
  return v;
}

Verdict phi_refinement_check() {
  Verdict v;
  const auto gaps = duality_family(curated_eps(), true);
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& gp : gaps) worst = std::min(worst, gp.phi_slack / gp.scale);
  v.detail << " min slack/scale=" << fmt(worst);
  v.check(worst >= -1e-6, "phi slack");
  return v;
}

Verdict yamabe_monotonicity() {
  Verdict v;
  const int d = 3;
  const auto g = make_grid(d, 100.0, 1024);
  FlowConfig cfg;
  cfg.m = yamabe_exponent(d);
  cfg.dt = 1e-4;
  cfg.t_end = 2.0;
  cfg.scheme = Scheme::ImplicitNewton;
  cfg.record_every = 10;
  const auto k = yamabe_separable_constants(d);
  auto bumped = [&](double a) {
    return RadialProfile::sample(
        g, [&](double r) { return k.c * std::pow(1.0 + r * r, -0.5 * (d + 2)) * (1.0 + a * std::exp(-r * r)); }, d + 2.0);
  };
  auto power = [&](double amp, double e) {
    return RadialProfile::sample(g, [&](double r) { return amp * std::pow(1.0 + r * r, -e); }, 2.0 * e);
  };
  const std::vector<std::pair<std::string, RadialProfile>> data{{"separable", yamabe_separable(1.0, 0.0, g)},
                                                                {"power3", power(1.0, 3.0)},
                                                                {"power2", power(2.0, 2.0)},
                                                                {"bumped+0.1", bumped(0.1)},
                                                                {"bumped-0.3", bumped(-0.3)}};
  for (const auto& [label, v0] : data) {
    const auto tr = run_yamabe(v0, cfg);
    double worst = 0.0;
    for (std::size_t i = 1; i < tr.size(); ++i) {
      worst = std::max(worst, (tr.H[i - 1] - tr.H[i]) / std::pow(tr.J[i - 1], (d + 2.0) / d));
    }
    v.detail << " " << label << ":maxdrop=" << fmt(worst);
    v.check(worst <= 1e-6, label + " H monotone");
    if (label == "separable") {
      const double rel = tr.extinct ? std::abs(tr.extinction_time - 1.0) : std::numeric_limits<double>::infinity();
      v.detail << ",T_ext=" << fmt(tr.extinction_time);
      v.check(rel <= 0.05, "extinction time within 5%");
    }
  }
  return v;
}

Verdict rfd_decay() {
  Verdict v;
  for (const auto& run : rfd_runs()) {
    const auto& tr = run.trace;
    const double f0 = tr.free_energy.front();
    double excess = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < tr.size(); ++k) {
      excess = std::max(excess, tr.free_energy[k] - (f0 * std::exp(-4.0 * tr.times[k]) * (1.0 + 1e-2) + 1e-14));
    }
    const double rate = late_rate(tr);
    v.detail << " [" << run.label << ": rate=" << fmt(rate) << " " << fmt(run.seconds) << " s]";
    v.check(excess <= 0.0, run.label + " decay bound");
    v.check(rate >= 3.92, run.label + " late rate");
    v.check(run.seconds < 60.0, run.label + " runtime");
  }
  return v;
}

Verdict improved_rate() {
  Verdict v;
  for (const auto& run : rfd_runs()) {
    const double eta = 2.0 * (run.m - 1.0 + 1.0);
    const double rate = late_rate(run.trace);
    v.detail << " [" << run.label << ": rate=" << fmt(rate) << " >= " << fmt(4.0 + eta - 0.05) << "]";
    v.check(rate >= 4.0 + eta - 0.05, run.label);
  }
  return v;
}

Verdict eep_and_quotient() {
  Verdict v;
  const double m = 0.5;
  const auto g = make_grid(1, 200.0, 2048);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double qmin = std::numeric_limits<double>::infinity();
  int defined = 0;
  for (int i = 0; i < 20; ++i) {
    std::array<double, 3> a{};
    for (auto& x : a) x = u(rng);
    const auto e = entropy_pair(perturbed_barenblatt(g, m, 0.1, a), m);
    if (e.quotient) {
      ++defined;
      qmin = std::min(qmin, *e.quotient);
    }
  }
  v.detail << " profiles=" << defined << " min Q=" << fmt(qmin);
  v.check(defined == 20, "20 admissible profiles");
  v.check(qmin >= 4.0 * (1.0 - 1e-3), "Q >= 4(1 - 1e-3)");

  const auto k = rate_constants(1, 0.8, 1.0);
  const auto gb = make_grid(1, 60.0, 1024);
  FlowConfig cfg = rfd_flow(0.8);
  cfg.t_end = 1.0;
  const auto back = backward_lemma_check(run_rfd(dilated_barenblatt(gb, 0.8, 1.3), cfg), k.eta, 1.0);
  v.detail << " backward lemma: " << back.detail;
  v.check(back.hypothesis_met && back.passed, "backward lemma");

  const double eta = 1.0, t_star = 0.3;
  const double c = eta * std::exp(-4.0 * t_star) / (4.0 + eta);
  FlowTrace ode;
  ode.kind = "rfd";
  for (int i = 0; i <= 3000; ++i) {
    const double t = 1e-4 * i;
    ode.times.push_back(t);
    ode.quotient.push_back(4.0 / (1.0 - c * std::exp(4.0 * t)));
  }
  const auto sat = backward_lemma_check(ode, eta, t_star, 1e-4);
  v.detail << " equality trace margin=" << fmt(sat.margin);
  v.check(sat.passed && std::abs(sat.margin) <= 1e-4, "equality trace saturates zeta");
  return v;
}

Verdict hardy_poincare() {
  Verdict v;
  for (auto [d, m] : std::vector<std::pair<int, double>>{{3, 0.8}, {1, 0.6}, {2, 0.9}}) {
    const auto t0 = Clock::now();
    const auto scan = hardy_poincare_scan(d, m, spectrum_grid(d, 4000, 200.0), d == 1 ? 1 : 4);
    const double secs = seconds_since(t0);
    const double expected = 4.0 * (2.0 - d * (1.0 - m));
    const double eu = std::abs(scan.unconstrained.lambda / 4.0 - 1.0);
    const double ec = std::abs(scan.centered.lambda / expected - 1.0);
    v.detail << " (" << d << "," << fmt(m) << "): " << fmt(scan.unconstrained.lambda) << "@ell=" << scan.unconstrained.ell
             << " centered " << fmt(scan.centered.lambda) << "/" << fmt(expected) << " " << fmt(secs) << " s";
    const std::string tag = "(" + std::to_string(d) + "," + fmt(m) + ")";
    v.check(eu <= 1e-2 && scan.unconstrained.ell == 1, tag + " unconstrained gap");
    v.check(ec <= 1e-2, tag + " centered gap");
    v.check(secs < 10.0, tag + " runtime");
  }
  return v;
}

Verdict mass_conservation() {
  Verdict v;
  double worst = 0.0;
  for (const auto& run : rfd_runs()) {
    const auto& tr = run.trace;
    for (std::size_t k = 0; k < tr.size(); ++k) worst = std::max(worst, std::abs(tr.mass[k] / tr.mass.front() - 1.0));
    v.check(tr.times.back() >= 5.0 - 1e-9, run.label + " reaches t=5");
  }
  v.detail << " max relative drift=" << fmt(worst);
  v.check(worst <= 1e-6, "mass drift");
  return v;
}

Verdict sphere_degeneracy() {
  Verdict v;
  const auto g = ZonalGrid::make(3, 64);
  const auto eps = logspace(1e-3, 1e-2, 8);
  std::vector<double> def, stab;
  double qmin = std::numeric_limits<double>::infinity(), qmax = -qmin;
  for (double e : eps) {
    const auto rep = sphere_deficit(ZonalProfile::sample(g, [=](double t) { return 1.0 + e * std::cos(t); }), 4.0);
    def.push_back(rep.deficit);
    stab.push_back(rep.distance);
    const double q = rep.quotient.value_or(std::numeric_limits<double>::quiet_NaN());
    qmin = std::min(qmin, q);
    qmax = std::max(qmax, q);
  }
  const double sd = loglog_slope(eps, def), ss = loglog_slope(eps, stab);
  v.detail << " deficit slope=" << fmt(sd) << " stability slope=" << fmt(ss) << " q in [" << fmt(qmin) << ", " << fmt(qmax)
           << "]";
  v.check(std::abs(sd - 4.0) <= 0.1, "deficit slope");
  v.check(std::abs(ss - 4.0) <= 0.1, "stability slope");
  v.check(qmin > 0.0 && std::isfinite(qmax), "bounded quotient");
  return v;
}

Verdict m_formulas() {
  Verdict v;
  const auto [lo, hi] = m_exponents(3, 4.0);
  v.detail << " (3,4): " << fmt(lo) << ", " << fmt(hi);
  v.check(std::abs(lo - 0.48787) <= 5e-6 && std::abs(hi - 0.91213) <= 5e-6, "m_pm at (3,4)");
  for (int d : {3, 4}) {
    const auto [a, b] = m_exponents(d, 2.0 * d / (d - 2.0));
    const double m1 = (d - 1.0) / d;
    v.detail << " d=" << d << ": " << fmt(a) << ", " << fmt(b);
    v.check(std::abs(a - m1) <= 1e-10 && std::abs(b - m1) <= 1e-10, "m_pm at 2* for d=" + std::to_string(d));
  }
  return v;
}

Verdict sphere_flow_monotone() {
  Verdict v;
  const auto [lo, hi] = m_exponents(3, 4.0);
  const auto f0 = ZonalProfile::sample(ZonalGrid::make(3, 32), [](double t) { return 1.0 + 0.2 * std::cos(t); });
  FlowConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 3.0;
  cfg.scheme = Scheme::SemiImplicit;
  cfg.record_every = 10;
  for (double m : {lo, 0.5 * (lo + hi), hi}) {
    const auto tr = sphere_flow(f0, 4.0, m, cfg);
    const bool mono = deficit_nonincreasing(tr, 1e-12 * std::abs(tr.deficit.front()));
    v.detail << " m=" << fmt(m) << ":" << fmt(tr.deficit.front()) << "->" << fmt(tr.deficit.back());
    v.check(mono, "monotone at m=" + fmt(m));
  }
  return v;
}

Verdict gaussian_checks() {
  Verdict v;
  const auto pi_grid = GaussianGrid::make(GaussianNormalization::PiNormal, 4801, 12.0);
  const auto st_grid = GaussianGrid::make(GaussianNormalization::Standard, 4801, 12.0);
  double max_def = 0.0, max_dist = 0.0;
  for (auto* g : {&pi_grid, &st_grid}) {
    for (double a : {-1.1, -0.4, 0.5, 0.7}) {
      const auto u = GaussianProfile::sample(*g, [=](double x) { return 2.0 * std::exp(a * x); });
      max_def = std::max(max_def, std::abs(gaussian_lsi_deficit(u).deficit));
      max_dist = std::max(max_dist, logsob_distance(u).distance2);
    }
  }
  v.detail << " exponential deficit=" << fmt(max_def) << " distance=" << fmt(max_dist);
  v.check(max_def <= 1e-6, "zero deficit");
  v.check(max_dist <= 1e-8, "zero logsob distance");

  const double c1 = thmmain2_c_star(1.0);
  v.detail << " C*(1)-1=" << fmt(c1 - 1.0);
  v.check(std::abs(c1 - (1.0 + 1.0 / 432.0)) <= 1e-15 && std::abs(c1 - 1.00231481) <= 1e-8, "C*(1)");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double min_margin = std::numeric_limits<double>::infinity();
  int passed = 0, total = 0;
  for (double r : {0.5, 1.0, 2.0}) {
    for (int t = 0; t < 10; ++t) {
      const double w = r * (0.3 + 0.7 * unit(rng));
      const double b = 2.0 * unit(rng) - 0.5;
      auto u = GaussianProfile::sample(st_grid, [=](double x) { return smooth_bump(x / w) * (1.0 + b * x * x / (w * w)); });
      const double n = std::sqrt(ineqlab::detail::gaussian_norm2(u));
      for (auto& x : u.values) x /= n;
      const auto rep = thmmain2_verify(u, r);
      passed += rep.passed;
      ++total;
      min_margin = std::min(min_margin, rep.margin);
    }
  }
  v.detail << " compact-support suite " << passed << "/" << total << " min margin=" << fmt(min_margin);
  v.check(passed == total, "compact-support suite");

  const double sq = std::sqrt(2.0 * std::numbers::pi);
  double bridge = 0.0;
  for (double w : {0.8, 1.5, 3.0}) {
    auto fn = [=](double y) { return smooth_bump(y / w) + 0.1; };
    const auto up = GaussianProfile::sample(pi_grid, fn);
    const double lhs = gaussian_lsi_deficit(up).deficit;
    const double rhs =
        2.0 * std::numbers::pi * gaussian_lsi_deficit(GaussianProfile::sample(st_grid, [&](double y) { return fn(y / sq); })).deficit;
    bridge = std::max(bridge, std::abs(lhs - rhs) / ineqlab::detail::gaussian_norm2(up));
  }
  v.detail << " bridge residual=" << fmt(bridge);
  v.check(bridge <= 1e-8, "normalization bridge");
  return v;
}

Verdict large_d_trend() {
  Verdict v;
  const std::vector<int> dims{8, 16, 32, 64};
  struct Profile {
    std::string label;
    std::function<double(double)> f, df;
    double support;
  };
  const double w = 0.9, s = 0.5;
  const std::vector<Profile> profiles{
      {"bump", [=](double y) { return smooth_bump(y / w); }, [=](double y) { return smooth_bump_derivative(y / w) / w; }, w},
      {"shifted", [=](double y) { return smooth_bump(y) * (1.0 + s * y); },
       [=](double y) { return smooth_bump_derivative(y) * (1.0 + s * y) + s * smooth_bump(y); }, 1.0},
  };
  for (const auto& p : profiles) {
    const auto rows = large_d_limit_check(p.f, p.df, p.support, 1.5, dims, 200);
    double prev = std::numeric_limits<double>::infinity();
    bool strict = rows.size() == dims.size();
    v.detail << " " << p.label << ":";
    for (const auto& r : rows) {
      strict = strict && !r.skipped && r.difference < prev;
      prev = r.difference;
      v.detail << " " << fmt(r.difference);
    }
    v.check(strict, p.label + " strictly decreasing");
  }
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Verdict determinism(const std::string& tool, const std::string& config) {
  Verdict v;
  if (tool.empty() || config.empty()) {
    v.check(false, "tool and config paths not given");
    return v;
  }
  const fs::path base = fs::temp_directory_path() / ("ineqlab-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(base);
  std::vector<fs::path> dirs{base / "a", base / "b"};
  for (const auto& dir : dirs) {
    const auto t0 = Clock::now();
    const std::string cmd = "\"" + tool + "\" --out \"" + dir.string() + "\" run \"" + config + "\" > /dev/null";
    const int rc = std::system(cmd.c_str());
    const double secs = seconds_since(t0);
    v.detail << " run " << dir.filename().string() << ": exit " << rc << ", " << fmt(secs) << " s;";
    v.check(rc == 0, "suite exit status");
    v.check(secs < 900.0, "suite wall-clock");
  }
  std::size_t files = 0, differing = 0;
  if (fs::is_directory(dirs[0]) && fs::is_directory(dirs[1])) {
    for (const auto& e : fs::recursive_directory_iterator(dirs[0])) {
      if (!e.is_regular_file()) continue;
      ++files;
      const auto other = dirs[1] / fs::relative(e.path(), dirs[0]);
      if (!fs::exists(other) || slurp(e.path()) != slurp(other)) ++differing;
    }
    std::size_t files_b = 0;
    for (const auto& e : fs::recursive_directory_iterator(dirs[1])) files_b += e.is_regular_file();
    v.check(files == files_b, "same file set");
  }
  v.detail << " files=" << files << " differing=" << differing;
  v.check(files > 0 && differing == 0, "byte-identical outputs");
  fs::remove_all(base);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string tool = argc > 1 ? argv[1] : "";
  const std::string config = argc > 2 ? argv[2] : "";
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"sharp Sobolev constant", sharp_constant},
      {"duality identity", duality_identity},
      {"duality constant interval", duality_interval},
      {"phi refinement", phi_refinement_check},
      {"Yamabe monotonicity", yamabe_monotonicity},
      {"RFD decay", rfd_decay},
      {"improved rate", improved_rate},
      {"EEP and quotient", eep_and_quotient},
      {"Hardy-Poincare gaps", hardy_poincare},
      {"mass conservation", mass_conservation},
      {"sphere eps^4 degeneracy", sphere_degeneracy},
      {"m_pm formulas", m_formulas},
      {"sphere flow", sphere_flow_monotone},
      {"Gaussian", gaussian_checks},
      {"large-d trend", large_d_trend},
      {"determinism", [&] { return determinism(tool, config); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.check(false, std::string("exception: ") + e.what());
    }
    failures += !v.ok;
    std::cout << (v.ok ? "PASS" : "FAIL") << " " << (i < 9 ? "0" : "") << i + 1 << " " << criteria[i].first << ":"
              << v.detail.str() << std::endl;
  }
  std::cout << criteria.size() - failures << "/" << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
