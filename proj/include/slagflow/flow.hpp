#ifndef SLAGFLOW_FLOW_HPP
#define SLAGFLOW_FLOW_HPP

#include <functional>
#include <optional>
#include <vector>

#include "slagflow/curve.hpp"
#include "slagflow/geometry.hpp"
#include "slagflow/numerics.hpp"

namespace slagflow {

enum class VelocityFormula { Result1, Conformal, DoubleCover };

/// Signed normal speed at each point (multiplies unit_normal). Endpoints
/// return 0. The three formulas are algebraically equivalent routes and are
/// evaluated through their own intermediates; mutual agreement is the oracle.
/// Throws NearRoot if an interior point is within eps_root of a root.
std::vector<double> velocity(const MarkedCurve& c, const ComplexPoly& p, int n,
                             VelocityFormula formula, const NumericsConfig& cfg);

/// Geodesic curvature of the double cover gamma^1 in X^1 at each point
/// (w-chart near pinned endpoints, t-chart in the interior). Monitor only.
std::vector<double> double_cover_curvature(const MarkedCurve& c, const ComplexPoly& p);

enum class Verdict { Converged, Split, StepFailure, MaxTime };

struct FlowRecord {
    double tau;
    double sup_theta;
    double inf_theta;
    double weighted_volume;
    double min_root_dist;
    double max_curvature_dc;
    double dt;
    double theta_bar;
    double l2_phase_var;
};

struct FlowReport {
    std::vector<FlowRecord> series;
    Verdict verdict = Verdict::MaxTime;
    int split_root = -1;
    double split_tau = 0.0;
    // per-step monotonicity violations, tracked over every accepted step
    double max_sup_increase = 0.0;
    double max_inf_decrease = 0.0;
    double max_w_increase = 0.0;
    double worst_cone_variation = 0.0;
    long accepted_steps = 0;
};

struct RunResult {
    FlowReport report;
    std::vector<MarkedCurve> finals;   ///< leaves of the surgery tree
    std::vector<RunResult> children;   ///< post-surgery sub-runs (empty unless Split)
};

/// One explicit Euler step of size dt: z_k += dt * V_k * n_k, endpoints
/// fixed, spacing-triggered resample, grading continued from the previous
/// profile. Throws StepRejected if the maximum principle or W-monotonicity
/// fails beyond mp_tol.
MarkedCurve step(const MarkedCurve& c, const ComplexPoly& p, int n, double dt,
                 const NumericsConfig& cfg);

using SnapshotCallback =
    std::function<void(const MarkedCurve&, const FlowRecord&, long step_index)>;

/// Adaptive-dt flow loop with singularity detection and surgery recursion.
RunResult run(const MarkedCurve& c0, const ComplexPoly& p, int n,
              const NumericsConfig& cfg, const SnapshotCallback& snapshot = nullptr);

/// Fires when the curve approaches a root with inward speed; splits there,
/// snapping the closest point to the root and re-smoothing one neighbour on
/// each side. Throws SplitFailed if a piece would be shorter than N_min.
std::optional<std::pair<MarkedCurve, MarkedCurve>> detect_and_split(
    const MarkedCurve& c, const ComplexPoly& p, int n, const NumericsConfig& cfg);

/// -Laplace^Omega theta in the O(n)-reduced form: the predicted d(theta)/d(tau),
///   (1 / (w R^{n-1})) d/ds ( w R^{n-1} d(theta)/ds ),
/// with R = |p|^{1/2}, w = omega_weight, s arclength on the double cover.
/// Optional measure override (same length as the curve) for synthetic tests.
std::vector<double> weighted_laplacian_diagnostic(
    const MarkedCurve& c, const ComplexPoly& p, int n, const PhaseProfile& theta,
    const std::vector<double>* measure_override = nullptr);

/// Largest variation of theta(gamma') over any arclength window of length
/// w_cone (cone diagnostic; must stay below pi - cone_margin on stable runs).
double cone_variation(const MarkedCurve& c, const ComplexPoly& p, double w_cone);

/// Weighted mean phase and unnormalised weighted L^2 phase variance,
/// measure w * R^{n-1} ds on the double cover.
std::pair<double, double> phase_mean_and_variance(const MarkedCurve& c,
                                                  const ComplexPoly& p, int n,
                                                  const PhaseProfile& theta);

}  // namespace slagflow

#endif
