#include "slagflow/flow.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "slagflow/errors.hpp"

namespace slagflow {

namespace {

double mean_spacing(const MarkedCurve& c) {
    return c.length() / std::max(1, c.size() - 1);
}

double dot(Complex a, Complex b) { return (std::conj(a) * b).real(); }

// kappa and tangent at the points adjacent to a pinned endpoint, computed on
// the double cover through the local square-root coordinate w = sqrt(t - z).
// The w-curve is smooth through w = 0 (ghost reflection), so centered
// stencils stay well conditioned where one-sided ones downstairs degenerate.
struct GhostDq {
    double kappa;     // downstairs (t-chart) curvature
    double kappa_w;   // curvature of the w-curve itself
    Complex tangent;  // downstairs unit tangent
};

std::vector<GhostDq> ghost_end_quantities(const std::vector<Complex>& pts, Complex z,
                                          int count) {
    const int K = std::min<int>(6, static_cast<int>(pts.size()) - 1);
    std::vector<Complex> w(K + 1);
    w[0] = 0.0;
    for (int k = 1; k <= K; ++k) {
        const Complex s = std::sqrt(pts[k] - z);
        const Complex ref = (k == 1) ? s : w[k - 1] + (w[k - 1] - w[k - 2]);
        w[k] = (std::abs(s - ref) <= std::abs(-s - ref)) ? s : -s;
    }
    // reflected ghosts: indices -K..K, w[-k] = -w[k]
    auto wat = [&](int k) -> Complex { return k >= 0 ? w[k] : -w[-k]; };
    std::vector<double> s(2 * K + 1, 0.0);  // chordal arclength, index k+K
    for (int k = -K + 1; k <= K; ++k)
        s[k + K] = s[k + K - 1] + std::abs(wat(k) - wat(k - 1));

    std::vector<GhostDq> out(count);
    for (int j = 1; j <= count; ++j) {
        const double a = s[j + K] - s[j - 1 + K];
        const double b = s[j + 1 + K] - s[j + K];
        const Complex wm = wat(j - 1), w0 = wat(j), wp = wat(j + 1);
        const Complex d1 =
            -b / (a * (a + b)) * wm + (b - a) / (a * b) * w0 + a / (b * (a + b)) * wp;
        const Complex d2 = 2.0 / (a * (a + b)) * wm - 2.0 / (a * b) * w0 + 2.0 / (b * (a + b)) * wp;
        const Complex tprime = 2.0 * w0 * d1;
        const Complex tsecond = 2.0 * d1 * d1 + 2.0 * w0 * d2;
        const double sp = std::abs(tprime);
        out[j - 1].kappa = (std::conj(tprime) * tsecond).imag() / (sp * sp * sp);
        const double wsp = std::abs(d1);
        out[j - 1].kappa_w = (std::conj(d1) * d2).imag() / (wsp * wsp * wsp);
        out[j - 1].tangent = tprime / sp;
    }
    return out;
}

// Differential quantities with the near-endpoint double-cover regularisation.
DifferentialQuantities regularized_dq(const MarkedCurve& c, const ComplexPoly& p) {
    DifferentialQuantities dq = differential_quantities(c);
    const int n = c.size();
    const int count = std::min(2, n / 2 - 1);
    if (c.left_root && count > 0) {
        const auto g = ghost_end_quantities(c.points, p.roots()[*c.left_root], count);
        for (int j = 0; j < count; ++j) {
            dq.curvature[j + 1] = g[j].kappa;
            dq.unit_tangent[j + 1] = g[j].tangent;
            dq.unit_normal[j + 1] = Complex(0.0, 1.0) * g[j].tangent;
        }
    }
    if (c.right_root && count > 0) {
        std::vector<Complex> rev(c.points.rbegin(), c.points.rend());
        const auto g = ghost_end_quantities(rev, p.roots()[*c.right_root], count);
        for (int j = 0; j < count; ++j) {
            dq.curvature[n - 2 - j] = -g[j].kappa;
            dq.unit_tangent[n - 2 - j] = -g[j].tangent;
            dq.unit_normal[n - 2 - j] = Complex(0.0, -1.0) * g[j].tangent;
        }
    }
    return dq;
}

// Trapezoid weighted volume on the sample points (cheap per-step monitor;
// reports and stability checks use the Gauss version in geometry).
double trapezoid_weighted_volume(const MarkedCurve& c, const ComplexPoly& p, int n) {
    const double alpha = 0.5 * (n - 2);
    double w = 0.0;
    double prev = std::pow(std::abs(p.eval(c.points[0])), alpha);
    for (int k = 1; k < c.size(); ++k) {
        const double cur = std::pow(std::abs(p.eval(c.points[k])), alpha);
        w += 0.5 * (prev + cur) * std::abs(c.points[k] - c.points[k - 1]);
        prev = cur;
    }
    return w;
}

std::vector<double> velocity_with_dq(const MarkedCurve& c, const ComplexPoly& p, int n,
                                     VelocityFormula formula, const NumericsConfig& cfg,
                                     const DifferentialQuantities& dq) {
    const int N = c.size();
    const double guard = cfg.end_guard_factor * mean_spacing(c);
    const auto prox = min_root_distance(c, p, guard);
    if (prox.distance <= cfg.eps_root)
        throw NearRoot("interior point within eps_root of a root; run detect_and_split first");

    std::vector<double> v(N, 0.0);
    for (int k = 1; k + 1 < N; ++k) {
        Complex pv, dpv, ddpv;
        p.eval2(c.points[k], pv, dpv, ddpv);
        const double ap = std::abs(pv);
        const Complex nrm = dq.unit_normal[k];
        const double kappa = dq.curvature[k];
        const double dn_log_p = ((dpv / pv) * nrm).real();
        const double g1 = 1.0 + 0.25 * std::norm(dpv) / ap;

        switch (formula) {
            case VelocityFormula::Result1:
                v[k] = (kappa + (1.0 - 0.5 * n) * dn_log_p) / g1;
                break;
            case VelocityFormula::Conformal: {
                const double g = std::pow(ap, n - 2);
                const double f = std::pow(ap, n - 1) / (ap + 0.25 * std::norm(dpv));
                v[k] = f / g * (kappa - 0.5 * (n - 2) * dn_log_p);
                break;
            }
            case VelocityFormula::DoubleCover: {
                const double F = ap + 0.25 * std::norm(dpv);
                const double dnF = ap * dn_log_p + 0.5 * (std::conj(dpv) * ddpv * nrm).real();
                const double dn_log_F = dnF / F;
                const double dn_log_g1 = dn_log_F - dn_log_p;
                const double mcv1 = (kappa - 0.5 * dn_log_g1) / g1;
                v[k] = mcv1 - 0.5 * (n - 1) * dn_log_p / g1 +
                       0.5 * (dn_log_p + dn_log_g1) / g1;
                break;
            }
        }
    }
    return v;
}

// Least-squares cubic through ~6 samples; used to re-smooth the surgery
// neighbours after snapping the split point to the root.
Complex cubic_fit_eval(const std::vector<double>& s, const std::vector<Complex>& z,
                       double s_eval) {
    const int m = static_cast<int>(s.size());
    const double s0 = s[m / 2];
    Eigen::MatrixXd A(m, 4);
    Eigen::VectorXcd b(m);
    for (int i = 0; i < m; ++i) {
        const double d = s[i] - s0;
        A(i, 0) = 1.0;
        A(i, 1) = d;
        A(i, 2) = d * d;
        A(i, 3) = d * d * d;
        b(i) = z[i];
    }
    Eigen::VectorXcd coef =
        (A.transpose() * A).ldlt().solve(A.transpose() * b.cast<std::complex<double>>());
    const double d = s_eval - s0;
    return coef(0) + coef(1) * d + coef(2) * d * d + coef(3) * d * d * d;
}

struct StepScratch {
    PhaseLifts lifts;
    PhaseProfile profile;
    double w_trap;
};

StepScratch scratch_for(const MarkedCurve& c, const ComplexPoly& p, int n) {
    StepScratch s;
    s.lifts = phase_lifts(c, p);
    s.profile.values.resize(c.size());
    const double coeff = 0.5 * n - 1.0;
    const double off = 2.0 * kPi * c.grading_offset;
    for (int k = 0; k < c.size(); ++k)
        s.profile.values[k] = s.lifts.theta_gamma[k] + coeff * s.lifts.theta_p[k] + off;
    const auto [mn, mx] = std::minmax_element(s.profile.values.begin(), s.profile.values.end());
    s.profile.inf = *mn;
    s.profile.sup = *mx;
    s.w_trap = trapezoid_weighted_volume(c, p, n);
    return s;
}

MarkedCurve step_impl(const MarkedCurve& c, const ComplexPoly& p, int n, double dt,
                      const NumericsConfig& cfg, const StepScratch& before,
                      double target_h, StepScratch* after_out) {
    const auto dq = regularized_dq(c, p);
    const auto v = velocity_with_dq(c, p, n, VelocityFormula::Result1, cfg, dq);

    MarkedCurve next = c;
    next.tangents.clear();
    for (int k = 1; k + 1 < c.size(); ++k)
        next.points[k] = c.points[k] + dt * v[k] * dq.unit_normal[k];
    next.time = c.time + dt;
    next.anchor_theta_gamma = before.lifts.theta_gamma[1];
    next.anchor_theta_p = before.lifts.theta_p[1];

    // spacing-triggered tangential redistribution
    double hmin = std::numeric_limits<double>::infinity(), hmax = 0.0;
    for (int k = 1; k < next.size(); ++k) {
        const double h = std::abs(next.points[k] - next.points[k - 1]);
        hmin = std::min(hmin, h);
        hmax = std::max(hmax, h);
    }
    if (hmin < cfg.h_min_factor * target_h || hmax > cfg.h_max_factor * target_h)
        next = resample(next, target_h);

    StepScratch after = scratch_for(next, p, n);
    if (after.profile.sup > before.profile.sup + cfg.mp_tol ||
        after.profile.inf < before.profile.inf - cfg.mp_tol ||
        after.w_trap > before.w_trap + cfg.mp_tol)
        throw StepRejected("maximum principle or W-monotonicity violated beyond mp_tol");
    if (after_out) *after_out = std::move(after);
    return next;
}

}  // namespace

std::vector<double> velocity(const MarkedCurve& c, const ComplexPoly& p, int n,
                             VelocityFormula formula, const NumericsConfig& cfg) {
    return velocity_with_dq(c, p, n, formula, cfg, regularized_dq(c, p));
}

std::vector<double> double_cover_curvature(const MarkedCurve& c, const ComplexPoly& p) {
    const auto dq = differential_quantities(c);
    const int N = c.size();
    std::vector<double> out(N, 0.0);

    auto t_chart = [&](int k) {
        Complex pv, dpv, ddpv;
        p.eval2(c.points[k], pv, dpv, ddpv);
        const double ap = std::abs(pv);
        const double g1 = 1.0 + 0.25 * std::norm(dpv) / ap;
        const double dn_log_p = ((dpv / pv) * dq.unit_normal[k]).real();
        const double dnF = ap * dn_log_p + 0.5 * (std::conj(dpv) * ddpv * dq.unit_normal[k]).real();
        const double dn_log_g1 = dnF / (ap + 0.25 * std::norm(dpv)) - dn_log_p;
        return (dq.curvature[k] - 0.5 * dn_log_g1) / std::sqrt(g1);
    };

    const int guard = 3;
    for (int k = 0; k < N; ++k) {
        const bool near_l = c.left_root && k < guard;
        const bool near_r = c.right_root && k >= N - guard;
        if (!near_l && !near_r && k > 0 && k + 1 < N) {
            out[k] = t_chart(k);
        } else if (near_l || near_r) {
            // w-chart near the branch point: the metric is G(w)|dw|^2 with
            // G -> |p'(z)| as w -> 0, so kappa^1 ~ kappa_w / sqrt(|p'(z)|)
            // (the conformal correction is O(|w|) and ignored in this monitor).
            const Complex z = near_l ? p.roots()[*c.left_root] : p.roots()[*c.right_root];
            const std::vector<Complex> pts =
                near_l ? c.points
                       : std::vector<Complex>(c.points.rbegin(), c.points.rend());
            const int j = near_l ? k : N - 1 - k;
            if (j == 0) continue;  // branch point itself: filled from neighbour below
            const auto g = ghost_end_quantities(pts, z, j);
            const double sign = near_l ? 1.0 : -1.0;
            const double G = std::abs(p.eval_with_derivative(z).second);
            out[k] = sign * g[j - 1].kappa_w / std::sqrt(G);
        }
    }
    // branch points take the adjacent value
    if (N >= 2) {
        out[0] = out[1];
        out[N - 1] = out[N - 2];
    }
    return out;
}

MarkedCurve step(const MarkedCurve& c, const ComplexPoly& p, int n, double dt,
                 const NumericsConfig& cfg) {
    const auto before = scratch_for(c, p, n);
    return step_impl(c, p, n, dt, cfg, before, mean_spacing(c), nullptr);
}

std::optional<std::pair<MarkedCurve, MarkedCurve>> detect_and_split(
    const MarkedCurve& c, const ComplexPoly& p, int n, const NumericsConfig& cfg) {
    const double h = mean_spacing(c);
    const auto prox = min_root_distance(c, p, cfg.end_guard_factor * h);
    if (!(prox.distance < cfg.split_radius_factor * h)) return std::nullopt;

    const auto dq = regularized_dq(c, p);
    const auto v = velocity_with_dq(c, p, n, VelocityFormula::Result1, cfg, dq);
    const Complex root = p.roots()[prox.root_index];
    const int k = prox.point_index;
    const double inward = v[k] * dot(dq.unit_normal[k], root - c.points[k]);
    if (inward <= 0.0) return std::nullopt;

    const auto lifts = phase_lifts(c, p);
    const auto s = arclengths(c);
    const int N = c.size();

    auto smooth_neighbour = [&](std::vector<Complex>& pts, const std::vector<double>& sl,
                                int idx, int lo, int hi) {
        std::vector<double> ss;
        std::vector<Complex> zz;
        for (int i = lo; i <= hi; ++i)
            if (i != idx) {
                ss.push_back(sl[i]);
                zz.push_back(pts[i]);
            }
        if (ss.size() >= 4) pts[idx] = cubic_fit_eval(ss, zz, sl[idx]);
    };

    MarkedCurve a = c, b = c;
    a.points.assign(c.points.begin(), c.points.begin() + k + 1);
    a.points[k] = root;
    a.right_root = prox.root_index;
    b.points.assign(c.points.begin() + k, c.points.end());
    b.points[0] = root;
    b.left_root = prox.root_index;
    a.tangents.clear();
    b.tangents.clear();

    {
        std::vector<double> sa(s.begin(), s.begin() + k + 1);
        if (k >= 1) smooth_neighbour(a.points, sa, k - 1, std::max(0, k - 6), k);
        std::vector<double> sb(s.begin() + k, s.end());
        if (b.size() >= 2)
            smooth_neighbour(b.points, sb, 1, 0, std::min<int>(6, b.size() - 1));
    }

    a.anchor_theta_gamma = lifts.theta_gamma[1];
    a.anchor_theta_p = lifts.theta_p[1];
    b.anchor_theta_gamma = lifts.theta_gamma[std::min(k + 1, N - 2)];
    b.anchor_theta_p = lifts.theta_p[std::min(k + 1, N - 2)];

    const double h_parent = mean_spacing(c);
    a = resample(a, h_parent);
    b = resample(b, h_parent);
    if (a.size() < cfg.n_min || b.size() < cfg.n_min)
        throw SplitFailed("surgery piece would have fewer than N_min points");
    return std::make_pair(std::move(a), std::move(b));
}

std::vector<double> weighted_laplacian_diagnostic(const MarkedCurve& c, const ComplexPoly& p,
                                                  int n, const PhaseProfile& theta,
                                                  const std::vector<double>* measure_override) {
    const int N = c.size();
    std::vector<double> m(N), ds(N - 1);
    for (int k = 0; k < N; ++k) {
        if (measure_override) {
            m[k] = (*measure_override)[k];
        } else {
            const auto [pv, dpv] = p.eval_with_derivative(c.points[k]);
            m[k] = omega_weight(p, n, c.points[k]) *
                   std::pow(std::abs(pv), 0.5 * (n - 1));
        }
    }
    for (int k = 0; k + 1 < N; ++k) {
        const auto [pv0, dpv0] = p.eval_with_derivative(c.points[k]);
        const auto [pv1, dpv1] = p.eval_with_derivative(c.points[k + 1]);
        const double g0 = 1.0 + 0.25 * std::norm(dpv0) / std::max(std::abs(pv0), 1e-300);
        const double g1 = 1.0 + 0.25 * std::norm(dpv1) / std::max(std::abs(pv1), 1e-300);
        ds[k] = std::abs(c.points[k + 1] - c.points[k]) * 0.5 * (std::sqrt(g0) + std::sqrt(g1));
    }

    std::vector<double> out(N, 0.0);
    for (int k = 1; k + 1 < N; ++k) {
        const double mp = 0.5 * (m[k] + m[k + 1]);
        const double mm = 0.5 * (m[k] + m[k - 1]);
        const double flux_p = mp * (theta.values[k + 1] - theta.values[k]) / ds[k];
        const double flux_m = mm * (theta.values[k] - theta.values[k - 1]) / ds[k - 1];
        out[k] = (flux_p - flux_m) / (0.5 * (ds[k] + ds[k - 1])) / m[k];
    }
    return out;
}

double cone_variation(const MarkedCurve& c, const ComplexPoly& p, double w_cone) {
    const auto lifts = phase_lifts(c, p);
    const auto s = arclengths(c);
    const auto& th = lifts.theta_gamma;
    const int N = c.size();

    double worst = 0.0;
    std::deque<int> maxq, minq;
    int lo = 0;
    for (int hi = 0; hi < N; ++hi) {
        while (!maxq.empty() && th[maxq.back()] <= th[hi]) maxq.pop_back();
        maxq.push_back(hi);
        while (!minq.empty() && th[minq.back()] >= th[hi]) minq.pop_back();
        minq.push_back(hi);
        while (s[hi] - s[lo] > w_cone) {
            if (maxq.front() == lo) maxq.pop_front();
            if (minq.front() == lo) minq.pop_front();
            ++lo;
        }
        worst = std::max(worst, th[maxq.front()] - th[minq.front()]);
    }
    return worst;
}

std::pair<double, double> phase_mean_and_variance(const MarkedCurve& c, const ComplexPoly& p,
                                                  int n, const PhaseProfile& theta) {
    // d(mu) = w R^{n-1} ds^1 = (1/2) |p|^{(n-2)/2} |dz|
    const int N = c.size();
    std::vector<double> mu(N, 0.0);
    const double alpha = 0.5 * (n - 2);
    double prev = 0.5 * std::pow(std::abs(p.eval(c.points[0])), alpha);
    for (int k = 1; k < N; ++k) {
        const double cur = 0.5 * std::pow(std::abs(p.eval(c.points[k])), alpha);
        const double seg = 0.5 * (prev + cur) * std::abs(c.points[k] - c.points[k - 1]);
        mu[k - 1] += 0.5 * seg;
        mu[k] += 0.5 * seg;
        prev = cur;
    }
    double tot = 0.0, mean = 0.0;
    for (int k = 0; k < N; ++k) {
        tot += mu[k];
        mean += mu[k] * theta.values[k];
    }
    mean /= tot;
    double var = 0.0;
    for (int k = 0; k < N; ++k) {
        const double d = theta.values[k] - mean;
        var += mu[k] * d * d;
    }
    return {mean, var};
}

RunResult run(const MarkedCurve& c0, const ComplexPoly& p, int n, const NumericsConfig& cfg,
              const SnapshotCallback& snapshot) {
    RunResult result;
    FlowReport& rep = result.report;

    MarkedCurve cur = c0;
    const double target_h = mean_spacing(cur);
    {
        // pin the grading so later lifts are continued, not re-derived
        const auto lifts = phase_lifts(cur, p);
        cur.anchor_theta_gamma = lifts.theta_gamma[1];
        cur.anchor_theta_p = lifts.theta_p[1];
    }

    StepScratch scratch = scratch_for(cur, p, n);
    double dt_used = 0.0;
    long step_index = 0;

    auto make_record = [&](double dt) {
        const double guard = cfg.end_guard_factor * mean_spacing(cur);
        const auto prox = min_root_distance(cur, p, guard);
        const auto dc = double_cover_curvature(cur, p);
        double max_dc = 0.0;
        for (double kv : dc) max_dc = std::max(max_dc, std::abs(kv));
        const auto [mean, var] = phase_mean_and_variance(cur, p, n, scratch.profile);
        return FlowRecord{cur.time,      scratch.profile.sup, scratch.profile.inf,
                          scratch.w_trap, prox.distance,      max_dc,
                          dt,            mean,                var};
    };

    rep.series.push_back(make_record(0.0));
    rep.worst_cone_variation = cone_variation(cur, p, cfg.w_cone);

    while (true) {
        if (scratch.profile.sup - scratch.profile.inf < cfg.conv_tol) {
            rep.verdict = Verdict::Converged;
            break;
        }

        auto split = detect_and_split(cur, p, n, cfg);
        if (split) {
            const double h = mean_spacing(cur);
            const auto prox = min_root_distance(cur, p, cfg.end_guard_factor * h);
            rep.verdict = Verdict::Split;
            rep.split_root = prox.root_index;
            rep.split_tau = cur.time;
            result.children.push_back(run(split->first, p, n, cfg, snapshot));
            result.children.push_back(run(split->second, p, n, cfg, snapshot));
            for (auto& child : result.children)
                for (auto& f : child.finals) result.finals.push_back(f);
            return result;
        }

        if (cur.time >= cfg.tau_max) {
            rep.verdict = Verdict::MaxTime;
            break;
        }

        // CFL-type bound for the degenerating parabolic factor
        double min_g1 = std::numeric_limits<double>::infinity();
        for (int k = 1; k + 1 < cur.size(); ++k) {
            const auto [pv, dpv] = p.eval_with_derivative(cur.points[k]);
            min_g1 = std::min(min_g1, 1.0 + 0.25 * std::norm(dpv) / std::abs(pv));
        }
        const double h = mean_spacing(cur);
        double dt = cfg.c_safety * h * h * min_g1;
        dt = std::min(dt, cfg.tau_max - cur.time);

        bool accepted = false;
        MarkedCurve next;
        StepScratch next_scratch;
        for (int tries = 0; tries < 40 && dt >= cfg.dt_min; ++tries) {
            try {
                next = step_impl(cur, p, n, dt, cfg, scratch, target_h, &next_scratch);
                accepted = true;
                break;
            } catch (const StepRejected&) {
                dt *= 0.5;
            } catch (const NearRoot&) {
                break;  // let detect_and_split handle it next iteration
            }
        }
        if (!accepted) {
            // stalled without an approaching root => genuine step failure
            if (!detect_and_split(cur, p, n, cfg)) {
                rep.verdict = Verdict::StepFailure;
                break;
            }
            continue;
        }

        rep.max_sup_increase =
            std::max(rep.max_sup_increase, next_scratch.profile.sup - scratch.profile.sup);
        rep.max_inf_decrease =
            std::max(rep.max_inf_decrease, scratch.profile.inf - next_scratch.profile.inf);
        rep.max_w_increase = std::max(rep.max_w_increase, next_scratch.w_trap - scratch.w_trap);

        cur = std::move(next);
        scratch = std::move(next_scratch);
        dt_used = dt;
        ++rep.accepted_steps;
        ++step_index;

        if (step_index % cfg.record_every == 0) {
            rep.series.push_back(make_record(dt_used));
            rep.worst_cone_variation =
                std::max(rep.worst_cone_variation, cone_variation(cur, p, cfg.w_cone));
        }
        if (snapshot && cfg.snapshot_every > 0 && step_index % cfg.snapshot_every == 0)
            snapshot(cur, rep.series.back(), step_index);
    }

    if (rep.series.empty() || rep.series.back().tau != cur.time)
        rep.series.push_back(make_record(dt_used));
    result.finals.push_back(cur);
    return result;
}

}  // namespace slagflow
