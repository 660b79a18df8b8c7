#ifndef SLAGFLOW_NUMERICS_HPP
#define SLAGFLOW_NUMERICS_HPP

#include <cmath>
#include <complex>

namespace slagflow {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Shared numerics configuration. One record, all modules.
struct NumericsConfig {
    // polynomial
    double sep_tol = 1e-8;   ///< min allowed pairwise root distance
    double root_tol = 1e-10; ///< residual bound for cached roots
    double eps_root = 1e-4;  ///< interior points must stay this far from roots

    // curve discretisation
    int n_points = 400; ///< default sample count for built curves
    int n_min = 32;
    double h_min_factor = 0.5; ///< spacing window [h_min,h_max] = [0.5,2]*target_h
    double h_max_factor = 2.0;
    double resample_tol = 1.0;

    // flow
    double c_safety = 0.4;  ///< dt = c_safety * h^2 * min(1+|p'|^2/4|p|)
    double mp_tol = 1e-6;   ///< per-step monotonicity tolerance
    double conv_tol = 5e-4; ///< converged when sup(theta)-inf(theta) < conv_tol
    double tau_max = 50.0;
    double dt_min = 1e-12;
    double split_radius_factor = 3.0; ///< split_radius = factor * mean spacing
    double end_guard_factor = 8.0;    ///< arclength guard (in units of h) around pinned roots
    double w_cone = 0.5;              ///< arclength window for the cone diagnostic
    double cone_margin = 0.3;

    // slag shooting
    double delta0_factor = 1e-4;         ///< start offset, fraction of local root separation
    double capture_radius_factor = 1e-3; ///< capture radius, fraction of separation
    double shoot_step_factor = 1e-3;     ///< RK4 step, fraction of domain diameter

    // floer
    double idx_tol = 1e-6;
    int winding_bound = 1;

    // quadrature / output
    int quad_order = 8;     ///< Gauss-Legendre nodes per sample interval
    int snapshot_every = 0; ///< 0 disables snapshots
    int record_every = 1;   ///< timeseries thinning (violation maxima always per step)
};

/// Wrap an angle difference into (-pi, pi].
inline double wrap_angle(double a) {
    a = std::fmod(a, 2.0 * kPi);
    if (a <= -kPi) a += 2.0 * kPi;
    if (a > kPi) a -= 2.0 * kPi;
    return a;
}

/// Continue a lifted angle: value congruent to `raw` mod 2*pi, nearest to `prev`.
inline double continue_angle(double prev, double raw) {
    return prev + wrap_angle(raw - prev);
}

}  // namespace slagflow

#endif
