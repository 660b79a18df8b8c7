#include "slagflow/floer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slagflow/errors.hpp"
#include "slagflow/slag.hpp"

namespace slagflow {

namespace {

// tolerance for the (ineq) phase-range membership pre-filter; the discrete
// sup/inf of a sampled profile are accurate to O(h^2)
constexpr double kIneqTol = 1e-4;

double root_scale(const ComplexPoly& p) { return 1.0 + p.root_diameter(); }

// total lifted angle of `pts` (closed loop) around z, divided by 2 pi
int loop_winding(const std::vector<Complex>& pts, Complex z) {
    double total = 0.0;
    double prev = std::arg(pts.front() - z);
    for (std::size_t k = 1; k < pts.size(); ++k) {
        const double cur = std::arg(pts[k] - z);
        total += wrap_angle(cur - prev);
        prev = cur;
    }
    total += wrap_angle(std::arg(pts.front() - z) - prev);
    return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

std::vector<Complex> subdivided_segment(Complex a, Complex b, int pieces) {
    std::vector<Complex> out;
    out.reserve(pieces + 1);
    for (int i = 0; i <= pieces; ++i)
        out.push_back(a + (b - a) * (static_cast<double>(i) / pieces));
    return out;
}

// m signed turns around root d, spliced into the path at the vertex closest
// to the root; the out-and-back spur cancels exactly in the quadrature
std::vector<Complex> insert_loops(const std::vector<Complex>& path, const ComplexPoly& p,
                                  int root_index, int m) {
    if (m == 0) return path;
    const auto& roots = p.roots();
    const Complex z = roots[root_index];
    double rho = std::numeric_limits<double>::infinity();
    for (int j = 0; j < static_cast<int>(roots.size()); ++j)
        if (j != root_index) rho = std::min(rho, std::abs(roots[j] - z));
    rho = std::isfinite(rho) ? 0.35 * rho : 0.5;

    int q = 1;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 1; k + 1 < static_cast<int>(path.size()); ++k) {
        const double d = std::abs(path[k] - z);
        if (d < best) {
            best = d;
            q = k;
        }
    }
    const Complex e = z + rho * (path[q] - z) / std::abs(path[q] - z);

    std::vector<Complex> out(path.begin(), path.begin() + q + 1);
    out.push_back(e);
    const double a0 = std::arg(e - z);
    const int turns = std::abs(m);
    const int seg = 96 * turns;
    const double sign = m > 0 ? 1.0 : -1.0;
    for (int i = 1; i <= seg; ++i) {
        const double a = a0 + sign * 2.0 * kPi * turns * i / seg;
        out.push_back(z + rho * std::exp(Complex(0.0, a)));
    }
    out.push_back(e);
    out.insert(out.end(), path.begin() + q, path.end());
    return out;
}

LagClass make_class(std::vector<Complex> path, const ComplexPoly& p, int n, int root_a,
                    int root_b, double grading_ref, int quad_order) {
    LagClass c;
    c.n = n;
    c.root_pair = {root_a, root_b};
    c.winding = winding_vector(path, p);
    const auto pp = period_and_phase(path, p, n, grading_ref, quad_order);
    c.period = pp.period;
    c.phi = pp.phi;
    c.has_slag = false;
    c.rep_path = std::move(path);
    return c;
}

std::vector<Complex> representative_path(const LagClass& L, const ComplexPoly& p) {
    if (!L.rep_path.empty()) return L.rep_path;
    const auto& roots = p.roots();
    auto path = subdivided_segment(roots.at(L.root_pair.first),
                                   roots.at(L.root_pair.second), 128);
    for (int j = 0; j < static_cast<int>(L.winding.size()); ++j)
        if (L.winding[j] != 0) path = insert_loops(path, p, j, L.winding[j]);
    return path;
}

// enumerate integer vectors over `slots` with sum of |entries| <= budget
void enumerate_words(int slots, int budget, std::vector<int>& cur,
                     std::vector<std::vector<int>>& out) {
    if (slots == 0) {
        out.push_back(cur);
        return;
    }
    for (int v = -budget; v <= budget; ++v) {
        cur.push_back(v);
        enumerate_words(slots - 1, budget - std::abs(v), cur, out);
        cur.pop_back();
    }
}

// phase range of a representative path, pinned at both root endpoints;
// falls back to half a grading window around phi when the lift fails
std::pair<double, double> path_phase_range(const std::vector<Complex>& path,
                                           const ComplexPoly& p, int n, int root_a,
                                           int root_b, double phi) {
    try {
        MarkedCurve c;
        c.points = path;
        c.left_root = root_a;
        c.right_root = root_b;
        const auto prof = phase_profile(c, p, n);
        // profile lift is anchored at principal values; recentre on phi
        const double mid = 0.5 * (prof.sup + prof.inf);
        const double shift = 2.0 * kPi * std::round((phi - mid) / (2.0 * kPi));
        return {prof.inf + shift, prof.sup + shift};
    } catch (const Error&) {
        return {phi - 0.5 * kPi, phi + 0.5 * kPi};
    }
}

}  // namespace

int floer_index(const GradedIntersection& x, double idx_tol) {
    if (static_cast<int>(x.alphas.size()) != x.n)
        throw Error("floer_index: expected n alphas");
    double sum = 0.0;
    for (double a : x.alphas) {
        if (!(a > 0.0 && a < kPi)) throw Error("floer_index: alpha outside (0, pi)");
        sum += a;
    }
    const double val = (sum - x.theta1) / kPi;
    const double rounded = std::round(val);
    if (std::abs(val - rounded) > idx_tol)
        throw NotIntegral("floer_index: grading data is not integral");
    return static_cast<int>(rounded);
}

bool gradable_connect_sum(const GradedIntersection& x, double idx_tol) {
    return floer_index(x, idx_tol) == 1;
}

std::vector<int> winding_vector(const std::vector<Complex>& path, const ComplexPoly& p) {
    const auto& roots = p.roots();
    std::vector<int> w(roots.size(), 0);
    if (path.size() < 2) return w;

    std::vector<Complex> loop = path;
    const auto chord = subdivided_segment(path.back(), path.front(), 128);
    loop.insert(loop.end(), chord.begin() + 1, chord.end() - 1);

    const double tol = 1e-6 * root_scale(p);
    for (int j = 0; j < static_cast<int>(roots.size()); ++j) {
        if (std::abs(roots[j] - path.front()) < tol ||
            std::abs(roots[j] - path.back()) < tol)
            continue;
        w[j] = loop_winding(loop, roots[j]);
    }
    return w;
}

LagClass lag_class_of(const MarkedCurve& c, const ComplexPoly& p, int n,
                      const NumericsConfig& cfg) {
    if (!c.left_root || !c.right_root)
        throw Error("lag_class_of: curve must be pinned at both roots");
    const auto prof = phase_profile(c, p, n);
    return make_class(c.points, p, n, *c.left_root, *c.right_root,
                      0.5 * (prof.sup + prof.inf), cfg.quad_order);
}

std::vector<std::pair<LagClass, LagClass>> enumerate_splittings(
    const LagClass& L, const ComplexPoly& p, int n, int B, const NumericsConfig& cfg,
    bool with_representatives) {
    const auto& roots = p.roots();
    const int R = static_cast<int>(roots.size());
    const int a = L.root_pair.first, b = L.root_pair.second;
    const auto path = representative_path(L, p);
    const int N = static_cast<int>(path.size());

    std::vector<std::pair<LagClass, LagClass>> out;
    for (int c = 0; c < R; ++c) {
        if (c == a || c == b) continue;
        int j = 1;
        double best = std::numeric_limits<double>::infinity();
        for (int k = 1; k + 1 < N; ++k) {
            const double d = std::abs(path[k] - roots[c]);
            if (d < best) {
                best = d;
                j = k;
            }
        }
        std::vector<Complex> base1(path.begin(), path.begin() + j + 1);
        base1[j] = roots[c];
        std::vector<Complex> base2(path.begin() + j, path.end());
        base2[0] = roots[c];

        std::vector<int> others;
        for (int d = 0; d < R; ++d)
            if (d != a && d != b && d != c) others.push_back(d);
        std::vector<std::vector<int>> words;
        std::vector<int> cur;
        enumerate_words(static_cast<int>(others.size()), B, cur, words);

        for (const auto& u : words) {
            auto p1 = base1;
            auto p2 = base2;
            for (std::size_t i = 0; i < others.size(); ++i) {
                if (u[i] == 0) continue;
                p1 = insert_loops(p1, p, others[i], u[i]);
                p2 = insert_loops(p2, p, others[i], -u[i]);
            }
            auto c1 = make_class(std::move(p1), p, n, a, c, L.phi, cfg.quad_order);
            auto c2 = make_class(std::move(p2), p, n, c, b, L.phi, cfg.quad_order);
            if (with_representatives) {
                for (auto* piece : {&c1, &c2}) {
                    const auto conn = slag_connect(
                        p, n, piece->root_pair.first, piece->root_pair.second,
                        piece->phi - 0.75, piece->phi + 0.75, 0, cfg);
                    piece->has_slag = conn.has_value();
                }
            }
            out.emplace_back(std::move(c1), std::move(c2));
        }
    }
    return out;
}

StabilityReport check_stability(const MarkedCurve& c, const ComplexPoly& p, int n, int B,
                                const NumericsConfig& cfg) {
    StabilityReport rep;
    const auto prof = phase_profile(c, p, n);
    rep.sup_theta = prof.sup;
    rep.inf_theta = prof.inf;
    rep.weighted_vol = weighted_volume(c, p, n, cfg.quad_order);

    const auto L = lag_class_of(c, p, n, cfg);
    const double vtol = 1e-9 * (1.0 + rep.weighted_vol);
    for (auto& [c1, c2] : enumerate_splittings(L, p, n, B, cfg)) {
        SplittingVerdict v;
        v.root = c1.root_pair.second;
        // graded order: the side convention names the sub, and only the
        // destabilising orientation (phi(sub) >= phi(quotient)) counts; the
        // mirrored splitting on the other side of the root fails gradability
        const bool first_is_sub = L.winding[v.root] < 0;
        const LagClass& sub = first_is_sub ? c1 : c2;
        const LagClass& quotient = first_is_sub ? c2 : c1;
        const bool destabilising = sub.phi >= quotient.phi - cfg.idx_tol;
        v.close_ok = !(destabilising && rep.inf_theta < quotient.phi &&
                       sub.phi < rep.sup_theta);
        v.vclose_ok =
            !destabilising ||
            rep.weighted_vol <= std::abs(c1.period) + std::abs(c2.period) + vtol;
        const double lo = std::min(c1.phi, c2.phi);
        const double hi = std::max(c1.phi, c2.phi);
        v.ineq_filtered = lo >= rep.inf_theta - kIneqTol && hi <= rep.sup_theta + kIneqTol;
        v.first = std::move(c1);
        v.second = std::move(c2);
        rep.close_all = rep.close_all && v.close_ok;
        rep.vclose_all = rep.vclose_all && v.vclose_ok;
        rep.splittings.push_back(std::move(v));
    }
    return rep;
}

namespace {

std::vector<LagClass> jordan_holder_impl(const LagClass& L, const ComplexPoly& p, int n,
                                         int B, const NumericsConfig& cfg, int depth) {
    const int guard = static_cast<int>(p.roots().size()) * (2 * B + 1);
    if (depth > guard)
        throw NonTerminating("jordan_holder: recursion exceeded the enumeration bound");
    if (std::abs(L.period) < 1e-12) return {L};

    const auto path = representative_path(L, p);
    const auto [range_lo, range_hi] = path_phase_range(
        path, p, n, L.root_pair.first, L.root_pair.second, L.phi);

    const LagClass* best_sub = nullptr;
    const LagClass* best_quot = nullptr;
    auto splittings = enumerate_splittings(L, p, n, B, cfg);
    for (const auto& [c1, c2] : splittings) {
        const int croot = c1.root_pair.second;
        // frozen side convention: negative winding of L at the split root
        // selects the first piece as the sub (the side the flow pinches on)
        const bool first_is_sub = L.winding[croot] < 0;
        const LagClass& sub = first_is_sub ? c1 : c2;
        const LagClass& quotient = first_is_sub ? c2 : c1;
        if (sub.phi < quotient.phi - cfg.idx_tol) continue;  // not destabilising
        // (ineq) pre-filter: both phases inside L's representative phase range
        if (sub.phi < range_lo - kIneqTol || sub.phi > range_hi + kIneqTol) continue;
        if (quotient.phi < range_lo - kIneqTol || quotient.phi > range_hi + kIneqTol) continue;
        if (!best_sub || sub.phi > best_sub->phi + cfg.idx_tol ||
            (std::abs(sub.phi - best_sub->phi) <= cfg.idx_tol &&
             std::abs(sub.period) < std::abs(best_sub->period))) {
            best_sub = &sub;
            best_quot = &quotient;
        }
    }
    if (!best_sub) return {L};

    std::vector<LagClass> pieces{*best_sub};
    auto rest = jordan_holder_impl(*best_quot, p, n, B, cfg, depth + 1);
    pieces.insert(pieces.end(), rest.begin(), rest.end());
    return pieces;
}

}  // namespace

std::vector<LagClass> jordan_holder(const LagClass& L, const ComplexPoly& p, int n, int B,
                                    const NumericsConfig& cfg) {
    return jordan_holder_impl(L, p, n, B, cfg, 0);
}

}  // namespace slagflow
