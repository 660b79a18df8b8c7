#ifndef SLAGFLOW_FLOER_HPP
#define SLAGFLOW_FLOER_HPP

#include <utility>
#include <vector>

#include "slagflow/complex_poly.hpp"
#include "slagflow/curve.hpp"
#include "slagflow/geometry.hpp"
#include "slagflow/numerics.hpp"

namespace slagflow {

/// Graded transversal intersection data: L1 meets L2 in the model
/// {z_i = r e^{i alpha_i}}, with L2 normalised to phase 0 and theta1 the
/// graded phase of L1 at the point.
struct GradedIntersection {
    int n = 2;
    std::vector<double> alphas;  ///< n angles, each strictly in (0, pi)
    double theta1 = 0.0;
};

/// ind = (1/pi) (sum alpha_i - theta1); exact integer by the grading
/// integrality invariant. Throws NotIntegral when the data is inconsistent
/// beyond idx_tol, Error when an alpha leaves (0, pi).
int floer_index(const GradedIntersection& x, double idx_tol = 1e-6);

/// The connect sum L1 # L2 exists as a graded Lagrangian iff ind = 1.
bool gradable_connect_sum(const GradedIntersection& x, double idx_tol = 1e-6);

/// Winding numbers of the closed loop (path followed by the reversed
/// straight chord between its endpoints) around each root of p. Roots at
/// the path endpoints get entry 0.
std::vector<int> winding_vector(const std::vector<Complex>& path, const ComplexPoly& p);

/// The graded class of a curve pinned at both ends: root pair, winding
/// relative to the chord, period and cohomological phase (lifted nearest
/// the curve's mid phase), representative path. has_slag is left false
/// (not checked here).
LagClass lag_class_of(const MarkedCurve& c, const ComplexPoly& p, int n,
                      const NumericsConfig& cfg = {});

/// Candidate graded splittings of L through each root distinct from its
/// endpoints, plus winding exchanges of total weight <= B across the
/// remaining roots. Pieces are listed in path order (sub/quotient roles are
/// assigned by the side convention in jordan_holder). Piece phases are
/// lifted nearest L.phi, so each pair is a graded splitting of L. When
/// with_representatives is set, a SLag representative is sought by
/// slag_connect and has_slag records the outcome.
std::vector<std::pair<LagClass, LagClass>> enumerate_splittings(
    const LagClass& L, const ComplexPoly& p, int n, int B,
    const NumericsConfig& cfg = {}, bool with_representatives = false);

struct SplittingVerdict {
    int root = -1;  ///< intermediate root of the splitting
    LagClass first, second;
    bool close_ok = true;   ///< graded order not destabilising, or the ordered
                             ///< pair [phi(quot), phi(sub)] not inside (inf, sup)
    bool vclose_ok = true;   ///< not destabilising, or W <= |period1| + |period2|
    bool ineq_filtered = true;  ///< both phases inside [inf, sup] (pre-filter)
};

struct StabilityReport {
    double sup_theta = 0.0;
    double inf_theta = 0.0;
    double weighted_vol = 0.0;
    bool close_all = true;
    bool vclose_all = true;
    std::vector<SplittingVerdict> splittings;
};

StabilityReport check_stability(const MarkedCurve& c, const ComplexPoly& p, int n,
                                int B, const NumericsConfig& cfg = {});

/// Greedy Jordan-Holder decomposition: among destabilising splittings
/// (sub phase >= quotient phase, sub chosen by the frozen side convention:
/// negative winding of L at the split root selects the first piece, else the
/// second; both phases inside the representative's phase range per the
/// destabiliser pre-filter), pick the sub of maximal phase, tie-broken by
/// minimal |period|, and recurse on the quotient. Throws NonTerminating when
/// the recursion exceeds root_count * (2B + 1) levels.
std::vector<LagClass> jordan_holder(const LagClass& L, const ComplexPoly& p, int n,
                                    int B, const NumericsConfig& cfg = {});

}  // namespace slagflow

#endif
