#include "slagflow/slag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slagflow/errors.hpp"

namespace slagflow {

namespace {

struct Scales {
    double sep;      // root separation (1 for degree < 2)
    double diam;     // domain scale
    double delta0;   // launch offset
    double capture;  // capture radius
    double ds;       // nominal RK4 step
    Complex box_lo, box_hi;
};

Scales scales_for(const ComplexPoly& p, const NumericsConfig& cfg) {
    Scales s;
    s.sep = p.degree() >= 2 ? p.root_separation() : 1.0;
    s.diam = std::max(p.root_diameter(), s.sep);
    s.delta0 = cfg.delta0_factor * s.sep;
    s.capture = cfg.capture_radius_factor * s.sep;
    s.ds = cfg.shoot_step_factor * s.diam;

    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
    double ylo = xlo, yhi = xhi;
    for (const auto& r : p.roots()) {
        xlo = std::min(xlo, r.real());
        xhi = std::max(xhi, r.real());
        ylo = std::min(ylo, r.imag());
        yhi = std::max(yhi, r.imag());
    }
    const double pad = std::max(1.0, s.diam);
    s.box_lo = Complex(xlo - pad, ylo - pad);
    s.box_hi = Complex(xhi + pad, yhi + pad);
    return s;
}

bool in_box(Complex q, const Scales& s) {
    return q.real() >= s.box_lo.real() && q.real() <= s.box_hi.real() &&
           q.imag() >= s.box_lo.imag() && q.imag() <= s.box_hi.imag();
}

}  // namespace

ShootResult slag_shoot(const ComplexPoly& p, int n, int root_index, double phi,
                       int branch_k, double max_length, const NumericsConfig& cfg) {
    const auto& roots = p.roots();
    const Complex z = roots.at(root_index);
    const Scales sc = scales_for(p, cfg);

    const double phi_eff = phi + 2.0 * kPi * branch_k;
    const double theta_dp = std::arg(p.eval_with_derivative(z).second);
    const double beta = (2.0 * phi - (n - 2) * theta_dp) / n + 4.0 * kPi * branch_k / n;
    const double c2 = 0.5 * n - 1.0;
    const double lift_scale = std::max(1.0, std::abs(c2));

    ShootResult out;
    Complex q = z + sc.delta0 * std::exp(Complex(0.0, beta));
    // lift reference from the linearisation p ~ p'(z)(t - z)
    double theta_ref = continue_angle(theta_dp + beta, std::arg(p.eval(q)));

    auto tangent_at = [&](double theta_p) {
        return std::exp(Complex(0.0, phi_eff - c2 * theta_p));
    };
    auto field = [&](Complex t, double ref) {
        return tangent_at(continue_angle(ref, std::arg(p.eval(t))));
    };

    out.curve.points.push_back(q);
    out.curve.tangents.push_back(tangent_at(theta_ref));
    out.theta_p_lift.push_back(theta_ref);

    double ds = sc.ds;
    int halvings = 0;
    const long max_points = static_cast<long>(64.0 * max_length / sc.ds) + 4096;
    while (out.length < max_length &&
           static_cast<long>(out.curve.points.size()) < max_points) {
        const Complex k1 = field(q, theta_ref);
        const Complex k2 = field(q + 0.5 * ds * k1, theta_ref);
        const Complex k3 = field(q + 0.5 * ds * k2, theta_ref);
        const Complex k4 = field(q + ds * k3, theta_ref);
        const Complex qn = q + ds / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        const double d = wrap_angle(std::arg(p.eval(qn)) - theta_ref);
        if (std::abs(d) * lift_scale >= 0.5 * kPi) {
            ds *= 0.5;
            if (++halvings > 48)
                throw ShootStalled("lift strain persists below minimal step");
            continue;
        }
        theta_ref += d;
        out.length += ds;
        q = qn;
        ds = std::min(2.0 * ds, sc.ds);
        out.curve.points.push_back(q);
        out.curve.tangents.push_back(tangent_at(theta_ref));
        out.theta_p_lift.push_back(theta_ref);

        bool done = false;
        for (int j = 0; j < static_cast<int>(roots.size()); ++j) {
            if (j == root_index) continue;
            if (std::abs(q - roots[j]) < sc.capture) {
                out.stop = ShootStop::CapturedRoot;
                out.captured_root = j;
                done = true;
                break;
            }
        }
        if (!done && !in_box(q, sc)) {
            out.stop = ShootStop::LeftDomain;
            done = true;
        }
        if (done) break;
    }

    out.curve.grading_offset = -branch_k;
    if (out.curve.size() >= 2) {
        out.curve.anchor_theta_gamma = phi_eff - c2 * out.theta_p_lift[1];
        out.curve.anchor_theta_p = out.theta_p_lift[1];
    }
    return out;
}

std::optional<ConnectResult> slag_connect(const ComplexPoly& p, int n, int root_a,
                                          int root_b, double phi_lo, double phi_hi,
                                          int branch_k, const NumericsConfig& cfg) {
    const auto& roots = p.roots();
    const Complex zb = roots.at(root_b);
    const Scales sc = scales_for(p, cfg);
    const double chord = std::abs(zb - roots.at(root_a));
    const double max_length = 6.0 * (chord + sc.diam);

    struct Probe {
        double miss;
        double dist;
        int closest;
        ShootResult shot;
    };
    auto probe = [&](double phi) {
        Probe pr;
        pr.shot = slag_shoot(p, n, root_a, phi, branch_k, max_length, cfg);
        pr.dist = std::numeric_limits<double>::infinity();
        pr.closest = 0;
        for (int j = 0; j < pr.shot.curve.size(); ++j) {
            const double d = std::abs(pr.shot.curve.points[j] - zb);
            if (d < pr.dist) {
                pr.dist = d;
                pr.closest = j;
            }
        }
        const Complex tau = pr.shot.curve.tangents[pr.closest];
        pr.miss = (std::conj(tau) * (zb - pr.shot.curve.points[pr.closest])).imag();
        return pr;
    };

    // bracket the miss zero on a grid, preferring trajectories that approach
    const int grid = 33;
    std::vector<Probe> probes;
    probes.reserve(grid);
    std::vector<double> phis(grid);
    for (int i = 0; i < grid; ++i) {
        phis[i] = phi_lo + (phi_hi - phi_lo) * i / (grid - 1);
        probes.push_back(probe(phis[i]));
    }
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    const double approach = 0.75 * chord;
    for (int i = 0; i + 1 < grid; ++i) {
        if (probes[i].miss * probes[i + 1].miss > 0.0) continue;
        const double d = std::min(probes[i].dist, probes[i + 1].dist);
        if (d > approach) continue;
        if (d < best_dist) {
            best_dist = d;
            best = i;
        }
    }
    if (best < 0) return std::nullopt;

    double lo = phis[best], hi = phis[best + 1];
    double mlo = probes[best].miss;
    Probe last = probes[best + 1];
    for (int it = 0; it < 80 && hi - lo > 1e-14 * (1.0 + std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        last = probe(mid);
        if (last.miss == 0.0) break;
        if (mlo * last.miss <= 0.0) {
            hi = mid;
        } else {
            lo = mid;
            mlo = last.miss;
        }
    }
    if (last.dist > 20.0 * sc.capture) return std::nullopt;

    // assemble the pinned connector: root_a, the trajectory up to the closest
    // approach, root_b
    ConnectResult res;
    res.phi_star = 0.5 * (lo + hi);
    res.branch_k = branch_k;
    const auto& shot = last.shot;
    const int j = last.closest;
    MarkedCurve c;
    c.points.reserve(j + 3);
    c.tangents.reserve(j + 3);
    c.points.push_back(roots.at(root_a));
    c.tangents.push_back(shot.curve.tangents[0]);
    for (int i = 0; i <= j; ++i) {
        c.points.push_back(shot.curve.points[i]);
        c.tangents.push_back(shot.curve.tangents[i]);
    }
    c.points.push_back(zb);
    c.tangents.push_back(shot.curve.tangents[j]);
    c.left_root = root_a;
    c.right_root = root_b;
    c.grading_offset = shot.curve.grading_offset;
    // first interior point of the assembled curve is the shoot's first point
    const double c2 = 0.5 * n - 1.0;
    c.anchor_theta_p = shot.theta_p_lift[0];
    c.anchor_theta_gamma = (res.phi_star + 2.0 * kPi * branch_k) - c2 * shot.theta_p_lift[0];
    res.curve = std::move(c);
    return res;
}

ConeDirections cone_directions(const ComplexPoly& p, int n, int root_index, double I,
                               double S) {
    const Complex z = p.roots().at(root_index);
    const double theta_dp = std::arg(p.eval_with_derivative(z).second);
    auto beta = [&](double phi) { return (2.0 * phi - (n - 2) * theta_dp) / n; };
    return {beta(I), beta(S), (S - I) / n};
}

MarkedCurve local_model_curve(int n, double c, int samples, double theta_margin_fraction) {
    MarkedCurve out;
    out.points.resize(samples);
    out.tangents.resize(samples);
    const double span = kPi / n;
    const double margin = theta_margin_fraction * span;
    for (int j = 0; j < samples; ++j) {
        const double th = margin + (span - 2.0 * margin) * j / (samples - 1);
        const double r = std::pow(c / std::sin(n * th), 1.0 / n);
        out.points[j] = r * std::exp(Complex(0.0, th));
        const Complex dir = std::exp(Complex(0.0, th)) *
                            Complex(-1.0 / std::tan(n * th), 1.0);
        out.tangents[j] = dir / std::abs(dir);
    }
    return out;
}

std::vector<double> local_model_phase(const MarkedCurve& c, int n) {
    std::vector<Complex> tangents = c.tangents;
    if (tangents.empty()) tangents = differential_quantities(c).unit_tangent;
    const int N = c.size();
    std::vector<double> vals(N);
    double tg = std::arg(tangents[0]);
    double tz = std::arg(c.points[0]);
    vals[0] = tg + (n - 1) * tz;
    for (int j = 1; j < N; ++j) {
        tg = continue_angle(tg, std::arg(tangents[j]));
        tz = continue_angle(tz, std::arg(c.points[j]));
        vals[j] = tg + (n - 1) * tz;
    }
    // grading lift: the integer multiple of pi that centres the first value
    const double shift = kPi * std::round(vals[0] / kPi);
    for (double& v : vals) v -= shift;
    return vals;
}

}  // namespace slagflow
