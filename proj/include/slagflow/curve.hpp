#ifndef SLAGFLOW_CURVE_HPP
#define SLAGFLOW_CURVE_HPP

#include <optional>
#include <vector>

#include "slagflow/complex_poly.hpp"
#include "slagflow/numerics.hpp"

namespace slagflow {

/// Discretised curve in C with endpoints optionally pinned to roots of p,
/// carrying a grading lift choice.
///
/// grading_offset adds 2*pi*offset to the phase profile. anchor_theta_gamma
/// and anchor_theta_p, when set, fix the continuous lifts of arg(gamma') and
/// arg(p(gamma)) at the first interior point; the flow updates them every
/// step so the grading is continued rather than re-derived from principal
/// values (which would jump when an arg crosses the +-pi cut).
struct MarkedCurve {
    std::vector<Complex> points;
    std::optional<int> left_root;   ///< root index or Free
    std::optional<int> right_root;  ///< root index or Free
    double time = 0.0;              ///< flow time tau
    int grading_offset = 0;

    /// Analytic unit tangents, when the construction provides them
    /// (SLag shooting does). Empty means "use finite differences".
    std::vector<Complex> tangents;

    std::optional<double> anchor_theta_gamma;
    std::optional<double> anchor_theta_p;

    int size() const { return static_cast<int>(points.size()); }
    double length() const;
};

struct DifferentialQuantities {
    std::vector<Complex> unit_tangent;
    std::vector<Complex> unit_normal;  ///< i * unit_tangent
    std::vector<double> curvature;     ///< signed, > 0 bending toward unit_normal
};

/// Centered second-order finite differences in (chordal) arclength;
/// one-sided second-order stencils at the endpoints.
/// Throws TooFewPoints below 5 points.
DifferentialQuantities differential_quantities(const MarkedCurve& c);

/// Redistribute points equidistributed in arclength at spacing ~ target_h.
/// Endpoints unchanged; interpolation is an arclength-parametrised
/// Catmull-Rom spline, so the geometry moves by O(h^4 * kappa''').
MarkedCurve resample(const MarkedCurve& c, double target_h);

struct RootProximity {
    double distance;
    int root_index;
    int point_index;
};

/// Minimum distance from interior points to the roots of p. Points within
/// arclength end_guard of a pinned endpoint do not count against that
/// endpoint's own root.
RootProximity min_root_distance(const MarkedCurve& c, const ComplexPoly& p,
                                double end_guard);

/// Cumulative chordal arclength (s[0] = 0).
std::vector<double> arclengths(const MarkedCurve& c);

}  // namespace slagflow

#endif
