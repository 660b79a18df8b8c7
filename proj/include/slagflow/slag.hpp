#ifndef SLAGFLOW_SLAG_HPP
#define SLAGFLOW_SLAG_HPP

#include <optional>
#include <vector>

#include "slagflow/complex_poly.hpp"
#include "slagflow/curve.hpp"
#include "slagflow/numerics.hpp"

namespace slagflow {

enum class ShootStop { CapturedRoot, MaxLength, LeftDomain };

struct ShootResult {
    MarkedCurve curve;  ///< free endpoints; carries analytic tangents + anchors
    ShootStop stop = ShootStop::MaxLength;
    std::optional<int> captured_root;
    std::vector<double> theta_p_lift;  ///< lift of arg p(gamma) per point
    double length = 0.0;
};

/// Integrate gamma'(s) = exp(i (phi_eff - (n/2 - 1) theta_lift(p(gamma))))
/// at unit speed, phi_eff = phi + 2*pi*k, starting at offset delta0 from the
/// root along beta = (2*phi - (n-2)*arg p'(z)) / n + 4*pi*k / n.
/// The output curve is graded (grading_offset = -k, anchors set) so its
/// phase_profile is identically phi. Stops at max_length, within
/// capture_radius of another root, or on leaving the root bounding box.
/// Throws ShootStalled when step halving cannot keep the lift resolved.
ShootResult slag_shoot(const ComplexPoly& p, int n, int root_index, double phi,
                       int branch_k, double max_length,
                       const NumericsConfig& cfg = {});

struct ConnectResult {
    MarkedCurve curve;  ///< pinned at both roots
    double phi_star = 0.0;
    int branch_k = 0;
};

/// Bisection on phi over the signed closest-approach offset of the shoot
/// trajectory at root_b. Returns nullopt when the miss function has no sign
/// change over [phi_lo, phi_hi] among trajectories that approach root_b.
std::optional<ConnectResult> slag_connect(const ComplexPoly& p, int n, int root_a,
                                          int root_b, double phi_lo, double phi_hi,
                                          int branch_k, const NumericsConfig& cfg = {});

struct ConeDirections {
    double beta_lo = 0.0;  ///< starting direction of phase I
    double beta_hi = 0.0;  ///< starting direction of phase S
    double width = 0.0;    ///< (S - I)/n, the cone angle on the double cover
};

/// Boundary SLag directions at a root for the phase interval [I, S]
/// (branch k = 0). Downstairs the directions spread by 2(S - I)/n; the
/// reported width (S - I)/n is the cone angle of the lifted curve, where
/// angles at the branch point halve.
ConeDirections cone_directions(const ComplexPoly& p, int n, int root_index,
                               double I, double S);

/// The exact connect-sum model r^n sin(n theta) = c, theta in (0, pi/n),
/// sampled uniformly in theta on [margin, pi/n - margin] and oriented by
/// increasing theta. Carries analytic tangents.
MarkedCurve local_model_curve(int n, double c, int samples,
                              double theta_margin_fraction = 0.02);

/// Lifted local phase theta(gamma') + (n-1) theta(gamma) along the curve,
/// with the grading lift (integer multiple of pi) that zeroes the model.
/// Identically 0 on local_model_curve outputs.
std::vector<double> local_model_phase(const MarkedCurve& c, int n);

}  // namespace slagflow

#endif
