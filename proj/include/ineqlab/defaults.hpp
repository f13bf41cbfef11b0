#pragma once

// Physical defaults of the experiment runner. Any change to a value here
// bumps kVersion, which every JSON summary records.

#include <cstddef>

namespace ineqlab::defaults {

inline constexpr const char* kVersion = "1";

namespace yamabe {
inline constexpr int d = 3;
inline constexpr double r_max = 100.0;
inline constexpr std::size_t n = 1024;
inline constexpr double dt = 1e-4;
inline constexpr double t_end = 2.0;
inline constexpr int record_every = 10;
inline constexpr double h_tolerance = 1e-6;         // relative to J^{(d+2)/d}
inline constexpr double extinction_rel_tol = 0.05;
}  // namespace yamabe

namespace rfd {
inline constexpr int d = 1;
inline constexpr double m = 0.5;
inline constexpr double r_max_slow = 200.0;  // m < m_switch
inline constexpr double r_max_fast = 60.0;
inline constexpr double m_switch = 0.7;
inline constexpr std::size_t n = 1024;
inline constexpr double dt = 1e-3;
inline constexpr double t_end = 5.0;
inline constexpr int record_every = 20;
inline constexpr double decay_slack = 1e-2;
inline constexpr double energy_floor = 1e-14;
inline constexpr double mass_tol = 1e-6;
inline constexpr double fit_t0 = 1.0;
inline constexpr double fit_t1 = 4.0;
inline constexpr double fit_floor = 1e-9;  // samples with F < fit_floor F(0) are excluded
inline constexpr double min_rate = 3.92;
inline constexpr double improved_rate_slack = 0.05;
}  // namespace rfd

namespace spectrum {
inline constexpr int d = 3;
inline constexpr double m = 0.8;
inline constexpr std::size_t n = 4000;
inline constexpr double r_max = 200.0;
inline constexpr int ell_max = 4;
inline constexpr double rel_tol = 1e-2;
}  // namespace spectrum

namespace deficit {
inline constexpr int d = 3;
inline constexpr double r_max = 1000.0;
inline constexpr std::size_t n = 16384;
inline constexpr double deficit_tol = 1e-8;
inline constexpr double residual_tol = 1e-8;
inline constexpr double phi_tol = 1e-6;
inline constexpr double eep_rel_tol = 1e-3;
}  // namespace deficit

namespace sphere {
inline constexpr int d = 3;
inline constexpr double p = 4.0;
inline constexpr std::size_t nodes = 64;
inline constexpr double deficit_tol = 1e-12;  // relative to ||F||_2^2
inline constexpr double slope_tol = 0.1;
inline constexpr double flow_eps = 0.2;
inline constexpr std::size_t flow_nodes = 32;
inline constexpr double dt = 1e-3;
inline constexpr double t_end = 3.0;
inline constexpr int record_every = 10;
inline constexpr double monotone_tol = 1e-12;  // relative to the initial deficit
inline constexpr double large_d_p = 1.5;
inline constexpr std::size_t large_d_nodes = 200;
}  // namespace sphere

namespace gaussian {
inline constexpr std::size_t points = 4801;
inline constexpr double half_width = 12.0;
inline constexpr double deficit_tol = 1e-9;
inline constexpr double zero_deficit_tol = 1e-6;
inline constexpr double zero_distance_tol = 1e-8;
inline constexpr double bridge_tol = 1e-8;
inline constexpr double thm_tol = 1e-8;
}  // namespace gaussian

}  // namespace ineqlab::defaults
