#include "slagflow/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "slagflow/errors.hpp"

namespace slagflow {

namespace {

constexpr double kLiftJumpLimit = 0.95 * kPi;

// Gauss-Legendre nodes/weights on [0,1].
struct GL {
    std::vector<double> x, w;
};

GL gauss_legendre01(int order) {
    // Nodes/weights on [-1,1] for common orders; Newton refinement for others.
    GL g;
    g.x.resize(order);
    g.w.resize(order);
    for (int i = 0; i < order; ++i) {
        // initial guess (Chebyshev-like), refined by Newton on P_n
        double x = std::cos(kPi * (i + 0.75) / (order + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            if (order == 1) p1 = x;
            for (int k = 2; k <= order; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        g.x[i] = 0.5 * (1.0 - x);  // map to [0,1], ascending later
        g.w[i] = 1.0 / ((1.0 - x * x) * pp * pp);
    }
    // sort ascending in x
    std::vector<int> idx(order);
    for (int i = 0; i < order; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return g.x[a] < g.x[b]; });
    GL out;
    out.x.reserve(order);
    out.w.reserve(order);
    for (int i : idx) {
        out.x.push_back(g.x[i]);
        out.w.push_back(g.w[i]);
    }
    return out;
}

const GL& cached_gl(int order) {
    static thread_local int cached_order = -1;
    static thread_local GL cache;
    if (order != cached_order) {
        cache = gauss_legendre01(order);
        cached_order = order;
    }
    return cache;
}

bool near_root(Complex z, const ComplexPoly& p, double tol) {
    for (const auto& r : p.roots())
        if (std::abs(z - r) < tol) return true;
    return false;
}

}  // namespace

PhaseLifts phase_lifts(const MarkedCurve& c, const ComplexPoly& p) {
    const int n = c.size();
    if (n < 3) throw TooFewPoints("phase_lifts: need >= 3 points");

    std::vector<Complex> tangents = c.tangents;
    if (tangents.empty()) tangents = differential_quantities(c).unit_tangent;

    PhaseLifts lifts;
    lifts.theta_gamma.resize(n);
    lifts.theta_p.resize(n);

    // arg(gamma'), anchored at the first interior point.
    {
        const double raw1 = std::arg(tangents[1]);
        lifts.theta_gamma[1] =
            c.anchor_theta_gamma ? continue_angle(*c.anchor_theta_gamma, raw1) : raw1;
        for (int k = 2; k < n; ++k) {
            const double inc = wrap_angle(std::arg(tangents[k]) - lifts.theta_gamma[k - 1]);
            if (std::abs(inc) >= kLiftJumpLimit)
                throw LiftFailure("tangent angle increment exceeds lift resolution");
            lifts.theta_gamma[k] = lifts.theta_gamma[k - 1] + inc;
        }
        const double inc0 = wrap_angle(std::arg(tangents[0]) - lifts.theta_gamma[1]);
        if (std::abs(inc0) >= kLiftJumpLimit)
            throw LiftFailure("tangent angle increment exceeds lift resolution");
        lifts.theta_gamma[0] = lifts.theta_gamma[1] + inc0;
    }

    // arg(p(gamma)), continued over interior points; pinned endpoints get the
    // one-sided continuation into the root along the curve direction.
    {
        const bool pin_l = c.left_root.has_value();
        const bool pin_r = c.right_root.has_value();
        const int lo = pin_l ? 1 : 0;
        const int hi = pin_r ? n - 2 : n - 1;
        if (hi - lo < 2) throw TooFewPoints("phase_lifts: too few interior points");

        const double raw1 = std::arg(p.eval(c.points[lo]));
        lifts.theta_p[lo] = c.anchor_theta_p ? continue_angle(*c.anchor_theta_p, raw1) : raw1;
        for (int k = lo + 1; k <= hi; ++k) {
            const double inc = wrap_angle(std::arg(p.eval(c.points[k])) - lifts.theta_p[k - 1]);
            if (std::abs(inc) >= kLiftJumpLimit)
                throw LiftFailure("arg p increment exceeds lift resolution");
            lifts.theta_p[k] = lifts.theta_p[k - 1] + inc;
        }
        if (pin_l) lifts.theta_p[0] = 2.0 * lifts.theta_p[1] - lifts.theta_p[2];
        if (pin_r) lifts.theta_p[n - 1] = 2.0 * lifts.theta_p[n - 2] - lifts.theta_p[n - 3];
    }
    return lifts;
}

PhaseProfile phase_profile(const MarkedCurve& c, const ComplexPoly& p, int n) {
    const auto lifts = phase_lifts(c, p);
    PhaseProfile prof;
    prof.values.resize(c.size());
    const double coeff = 0.5 * n - 1.0;
    const double offset = 2.0 * kPi * c.grading_offset;
    for (int k = 0; k < c.size(); ++k)
        prof.values[k] = lifts.theta_gamma[k] + coeff * lifts.theta_p[k] + offset;
    const auto [mn, mx] = std::minmax_element(prof.values.begin(), prof.values.end());
    prof.inf = *mn;
    prof.sup = *mx;
    return prof;
}

double omega_weight(const ComplexPoly& p, int /*n*/, Complex t) {
    const auto [pv, dpv] = p.eval_with_derivative(t);
    const double q = std::abs(pv) + 0.25 * std::norm(dpv);
    if (q < 1e-300) throw WeightUndefined("p and p' both vanish");
    return 0.5 / std::sqrt(q);
}

std::vector<QuadNode> path_quadrature_nodes(const std::vector<Complex>& path,
                                            const ComplexPoly& p, int order) {
    std::vector<QuadNode> nodes;
    if (path.size() < 2) return nodes;
    const GL& gl = cached_gl(order);
    const double snap = 1e-8 * (1.0 + p.root_diameter());
    nodes.reserve((path.size() - 1) * order);

    // Substitution applies to any interval touching a root (path ends and
    // interior vertices alike: splittings route paths through roots).
    auto emit = [&](auto&& self, Complex a, Complex b) -> void {
        const Complex d = b - a;
        if (std::abs(d) == 0.0) return;
        const bool sub_a = near_root(a, p, snap);
        const bool sub_b = near_root(b, p, snap);
        if (sub_a && sub_b) {
            const Complex mid = 0.5 * (a + b);
            self(self, a, mid);
            self(self, mid, b);
            return;
        }
        if (sub_a) {
            // t = a + u^2 d, dt = 2u du d; nodes leave the root in path order
            for (int i = 0; i < order; ++i) {
                const double u = gl.x[i];
                nodes.push_back({a + u * u * d, gl.w[i] * 2.0 * u * d});
            }
        } else if (sub_b) {
            // t = b - u^2 d traversed toward the root: u from 1 down to 0
            for (int i = order - 1; i >= 0; --i) {
                const double u = gl.x[i];
                nodes.push_back({b - u * u * d, gl.w[i] * 2.0 * u * d});
            }
        } else {
            for (int i = 0; i < order; ++i)
                nodes.push_back({a + gl.x[i] * d, gl.w[i] * d});
        }
    };

    const int m = static_cast<int>(path.size()) - 1;
    for (int k = 0; k < m; ++k) emit(emit, path[k], path[k + 1]);
    return nodes;
}

double weighted_volume(const MarkedCurve& c, const ComplexPoly& p, int n, int quad_order) {
    const auto nodes = path_quadrature_nodes(c.points, p, quad_order);
    const double alpha = 0.5 * (n - 2);
    double w = 0.0;
    for (const auto& q : nodes)
        w += std::pow(std::abs(p.eval(q.t)), alpha) * std::abs(q.dweight);
    return w;
}

PeriodPhase period_and_phase(const std::vector<Complex>& path, const ComplexPoly& p, int n,
                             double grading_ref, int quad_order) {
    const auto nodes = path_quadrature_nodes(path, p, quad_order);
    const double alpha = 0.5 * (n - 2);

    Complex period = 0.0;
    bool have_arg = false;
    double arg = 0.0;
    for (const auto& q : nodes) {
        const Complex pv = p.eval(q.t);
        const double raw = std::arg(pv);
        if (!have_arg) {
            arg = raw;
            have_arg = true;
        } else {
            const double jump = wrap_angle(raw - arg);
            if (std::abs(jump) >= kPi / 2.0)
                throw BranchStep("arg jump >= pi/2 between quadrature nodes");
            arg += jump;
        }
        period += std::pow(std::abs(pv), alpha) * std::exp(Complex(0.0, alpha * arg)) * q.dweight;
    }
    return {period, continue_angle(grading_ref, std::arg(period))};
}

}  // namespace slagflow
