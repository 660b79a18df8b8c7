#ifndef SLAGFLOW_GEOMETRY_HPP
#define SLAGFLOW_GEOMETRY_HPP

#include <utility>
#include <vector>

#include "slagflow/complex_poly.hpp"
#include "slagflow/curve.hpp"
#include "slagflow/numerics.hpp"

namespace slagflow {

/// Continuous lift of the pointwise phase theta along a curve.
struct PhaseProfile {
    std::vector<double> values;
    double sup = 0.0;
    double inf = 0.0;
};

/// Continuous lifts of arg(gamma') and arg(p(gamma)) along the curve,
/// anchored at the first interior point (at the curve's stored anchors
/// when present, at principal values otherwise).
struct PhaseLifts {
    std::vector<double> theta_gamma;
    std::vector<double> theta_p;
};

PhaseLifts phase_lifts(const MarkedCurve& c, const ComplexPoly& p);

/// Pointwise phase theta = theta(gamma') + (n/2 - 1) * theta(p(gamma)),
/// continuously lifted, plus 2*pi*grading_offset.
PhaseProfile phase_profile(const MarkedCurve& c, const ComplexPoly& p, int n);

/// Scalar |Omega| over the base point t: 1 / (2*sqrt(|p| + |p'|^2/4)).
/// Finite at simple roots. Throws WeightUndefined if p and p' both vanish.
double omega_weight(const ComplexPoly& p, int n, Complex t);

/// Quadrature node on a polyline path: position and complex line element
/// (Gauss-Legendre weight times the chord direction). Intervals whose outer
/// end sits on a root get a square-root substitution so integrands
/// p^{(n-2)/2} stay smooth.
struct QuadNode {
    Complex t;
    Complex dweight;
};

std::vector<QuadNode> path_quadrature_nodes(const std::vector<Complex>& path,
                                            const ComplexPoly& p, int order);

/// W(gamma) = integral of |p(gamma)|^{(n-2)/2} |gamma'| du.
/// The sphere-volume constant A_{n-1}/2 is deliberately omitted.
double weighted_volume(const MarkedCurve& c, const ComplexPoly& p, int n,
                       int quad_order = 8);

struct PeriodPhase {
    Complex period;
    double phi;  ///< lifted arg of the period, nearest to the grading reference
};

/// period = integral of p(gamma)^{(n-2)/2} gamma' du with branch tracking
/// (same normalisation as weighted_volume). Propagates BranchStep.
PeriodPhase period_and_phase(const std::vector<Complex>& path, const ComplexPoly& p,
                             int n, double grading_ref = 0.0, int quad_order = 8);

/// Symbolic graded Lagrangian class: root pair, winding descriptor
/// (per-root loop winding relative to the straight chord), period, phase.
struct LagClass {
    int n = 2;
    std::pair<int, int> root_pair{0, 0};
    std::vector<int> winding;  ///< one entry per root of p
    Complex period = 0.0;
    double phi = 0.0;
    bool has_slag = false;  ///< a SLag representative was found (checked, not assumed)
    std::vector<Complex> rep_path;  ///< representative polyline for the class
};

}  // namespace slagflow

#endif
