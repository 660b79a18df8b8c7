#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "slagflow/complex_poly.hpp"
#include "slagflow/curve.hpp"
#include "slagflow/errors.hpp"
#include "slagflow/flow.hpp"
#include "slagflow/geometry.hpp"
#include "slagflow/numerics.hpp"

using namespace slagflow;

namespace {

MarkedCurve bumped_segment(const ComplexPoly& p, int from, int to, double bump, int N) {
    MarkedCurve c;
    const Complex a = p.roots()[from], b = p.roots()[to];
    const Complex nu = Complex(0, 1) * (b - a) / std::abs(b - a);
    c.points.resize(N);
    for (int k = 0; k < N; ++k) {
        const double u = double(k) / (N - 1);
        c.points[k] = a + (b - a) * u + bump * std::sin(kPi * u) * nu;
    }
    c.left_root = from;
    c.right_root = to;
    return c;
}

double trapezoid_w(const MarkedCurve& c, const ComplexPoly& p, int n) {
    const double alpha = 0.5 * (n - 2);
    double w = 0.0;
    for (int k = 1; k < c.size(); ++k) {
        const double fa = std::pow(std::abs(p.eval(c.points[k - 1])), alpha);
        const double fb = std::pow(std::abs(p.eval(c.points[k])), alpha);
        w += 0.5 * (fa + fb) * std::abs(c.points[k] - c.points[k - 1]);
    }
    return w;
}

}  // namespace

TEST_CASE("three velocity routes agree on random free curves") {
    const auto p = ComplexPoly::from_roots({{-1, 0}, {0.4, 0.9}, {1, 0}}, Complex(1, 0.3));
    NumericsConfig cfg;
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int n : {2, 3, 4, 6}) {
        MarkedCurve c;
        c.points.resize(150);
        const Complex base(3.5, 2.0);
        for (int k = 0; k < 150; ++k) {
            const double u = k / 149.0;
            c.points[k] = base + Complex(u, 0.3 * std::sin(3.0 * u) + 0.05 * unit(rng) * u * (1 - u));
        }
        const auto v1 = velocity(c, p, n, VelocityFormula::Result1, cfg);
        const auto v2 = velocity(c, p, n, VelocityFormula::Conformal, cfg);
        const auto v3 = velocity(c, p, n, VelocityFormula::DoubleCover, cfg);
        double scale = 0.0;
        for (double v : v1) scale = std::max(scale, std::abs(v));
        REQUIRE(scale > 0.0);
        for (std::size_t k = 0; k < v1.size(); ++k) {
            CHECK(std::abs(v1[k] - v2[k]) < 1e-10 * scale);
            CHECK(std::abs(v1[k] - v3[k]) < 1e-10 * scale);
        }
    }
}

TEST_CASE("the straight connector is stationary") {
    const auto p = ComplexPoly::from_roots({{-1, 0}, {1, 0}}, 1.0);
    NumericsConfig cfg;
    for (int n : {2, 3, 5}) {
        const auto c = bumped_segment(p, 0, 1, 0.0, 201);
        const auto v = velocity(c, p, n, VelocityFormula::Result1, cfg);
        for (double vk : v) CHECK(std::abs(vk) < 1e-9);
    }
}

TEST_CASE("velocity refuses interior points sitting on a root") {
    const auto p = ComplexPoly::from_roots({{-1, 0}, {0, 0}, {1, 0}}, 1.0);
    NumericsConfig cfg;
    const auto c = bumped_segment(p, 0, 2, 0.0, 101);  // passes through 0
    CHECK_THROWS_AS(velocity(c, p, 2, VelocityFormula::Result1, cfg), NearRoot);
}

TEST_CASE("gradient structure: dW matches the conformal pairing") {
    const auto p = ComplexPoly::from_roots({{-1, 0}, {1, 0}}, 1.0);
    NumericsConfig cfg;
    const int n = 3, N = 400;
    const auto c = bumped_segment(p, 0, 1, 0.15, N);
    const auto dq = differential_quantities(c);
    const auto v = velocity(c, p, n, VelocityFormula::Result1, cfg);

    std::mt19937 rng(5);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        // compactly supported normal perturbation
        std::vector<double> psi(N, 0.0);
        const double c1 = unit(rng), c2 = unit(rng);
        for (int k = 0; k < N; ++k) {
            const double u = double(k) / (N - 1);
            const double s = std::sin(kPi * u);
            psi[k] = s * s * (c1 + c2 * std::cos(2.0 * kPi * u));
        }
        const double eps = 1e-6;
        MarkedCurve plus = c, minus = c;
        for (int k = 0; k < N; ++k) {
            plus.points[k] += eps * psi[k] * dq.unit_normal[k];
            minus.points[k] -= eps * psi[k] * dq.unit_normal[k];
        }
        const double fd = (trapezoid_w(plus, p, n) - trapezoid_w(minus, p, n)) / (2.0 * eps);
        // dW = -int V * g1 * |p|^{(n-2)/2} * psi |dz|
        double pairing = 0.0;
        const double alpha = 0.5 * (n - 2);
        std::vector<double> f(N, 0.0);
        // endpoints: psi and V vanish there, and g1 diverges at the roots
        for (int k = 1; k < N - 1; ++k) {
            const auto [pv, dpv] = p.eval_with_derivative(c.points[k]);
            const double g1 = 1.0 + 0.25 * std::norm(dpv) / std::abs(pv);
            f[k] = -v[k] * g1 * std::pow(std::abs(pv), alpha) * psi[k];
        }
        for (int k = 1; k < N; ++k)
            pairing += 0.5 * (f[k] + f[k - 1]) * std::abs(c.points[k] - c.points[k - 1]);
        CHECK(std::abs(fd - pairing) < 1e-4 * (std::abs(pairing) + 1e-3));
    }
}

TEST_CASE("step shrinks the phase range and the weighted volume") {
    const auto p = ComplexPoly::from_roots({{-1, 0}, {1, 0}}, 1.0);
    NumericsConfig cfg;
    const int n = 2;
    auto c = bumped_segment(p, 0, 1, 0.2, 200);
    auto prof0 = phase_profile(c, p, n);
    double w0 = weighted_volume(c, p, n);
    for (int it = 0; it < 50; ++it) {
        c = step(c, p, n, 2e-6, cfg);
        const auto prof = phase_profile(c, p, n);
        const double w = weighted_volume(c, p, n);
        CHECK(prof.sup <= prof0.sup + cfg.mp_tol);
        CHECK(prof.inf >= prof0.inf - cfg.mp_tol);
        CHECK(w <= w0 + cfg.mp_tol);
        prof0 = prof;
        w0 = w;
    }
}

TEST_CASE("oversized steps are rejected, not silently taken") {
    const auto p = ComplexPoly::from_roots({{-1, 0}, {1, 0}}, 1.0);
    NumericsConfig cfg;
    const auto c = bumped_segment(p, 0, 1, 0.2, 120);
    CHECK_THROWS_AS(step(c, p, 2, 0.05, cfg), StepRejected);
}

TEST_CASE("detect_and_split fires on an inward approach to a root") {
    const auto p = ComplexPoly::from_roots({{-1, 0}, {0, 0}, {1, 0}}, 1.0);
    NumericsConfig cfg;
    // an arc between the outer roots dipping to within the split radius of 0
    const int N = 200;
    MarkedCurve c;
    c.points.resize(N);
    const double h = 2.0 / (N - 1);
    for (int k = 0; k < N; ++k) {
        const double u = double(k) / (N - 1);
        c.points[k] = Complex(-1.0 + 2.0 * u, 1.5 * h * std::sin(kPi * u));
    }
    c.left_root = 0;
    c.right_root = 2;
    const auto split = detect_and_split(c, p, 2, cfg);
    REQUIRE(split.has_value());
    const auto& [l, r] = *split;
    CHECK(*l.left_root == 0);
    CHECK(*l.right_root == 1);
    CHECK(*r.left_root == 1);
    CHECK(*r.right_root == 2);
    CHECK(std::abs(l.points.back() - Complex(0, 0)) < 1e-14);
    CHECK(std::abs(r.points.front() - Complex(0, 0)) < 1e-14);
    CHECK(l.size() >= cfg.n_min);
    CHECK(r.size() >= cfg.n_min);

    // far from any root: no split
    const auto q = ComplexPoly::from_roots({{-1, 0}, {1, 0}}, 1.0);
    MarkedCurve d = c;
    d.right_root = 1;
    CHECK_FALSE(detect_and_split(d, q, 2, cfg).has_value());
}

TEST_CASE("weighted laplacian reproduces a synthetic second derivative") {
    // measure override 1 turns the operator into d^2/ds^2 on the double cover;
    // far from the root of p = t the cover metric is flat to ~1e-7
    const auto p = ComplexPoly::from_coeffs({{0, 0}, {1, 0}});
    MarkedCurve c;
    const int N = 160;
    const Complex base(1e6, 0.0);
    for (int k = 0; k < N; ++k) c.points.push_back(base + Complex(0.01 * k, 0.0));
    PhaseProfile theta;
    theta.values.resize(N);
    std::vector<double> s(N, 0.0);
    for (int k = 1; k < N; ++k) {
        const auto [pv, dpv] = p.eval_with_derivative(0.5 * (c.points[k] + c.points[k - 1]));
        const double g1 = 1.0 + 0.25 * std::norm(dpv) / std::abs(pv);
        s[k] = s[k - 1] + std::abs(c.points[k] - c.points[k - 1]) * std::sqrt(g1);
    }
    for (int k = 0; k < N; ++k) theta.values[k] = s[k] * s[k];
    const std::vector<double> ones(N, 1.0);
    const auto lap = weighted_laplacian_diagnostic(c, p, 3, theta, &ones);
    for (int k = 2; k < N - 2; ++k) CHECK(lap[k] == doctest::Approx(2.0).epsilon(1e-4));
}

TEST_CASE("cone variation of a circle matches w/R") {
    const auto p = ComplexPoly::from_roots({{100, 100}}, 1.0);
    MarkedCurve c;
    const double R = 2.0;
    const int N = 600;
    for (int k = 0; k < N; ++k) {
        const double a = 1.8 * kPi * k / (N - 1);
        c.points.push_back(R * std::exp(Complex(0.0, a)));
    }
    const double w = 0.5;
    CHECK(cone_variation(c, p, w) == doctest::Approx(w / R).epsilon(0.02));
}

TEST_CASE("phase statistics: constant profiles have zero variance") {
    const auto p = ComplexPoly::from_roots({{-1, 0}, {1, 0}}, 1.0);
    MarkedCurve c;
    for (int k = 0; k < 100; ++k) c.points.push_back(Complex(-0.9 + 1.8 * k / 99.0, 0.0));
    PhaseProfile theta;
    theta.values.assign(100, 0.7);
    const auto [mean, var] = phase_mean_and_variance(c, p, 3, theta);
    CHECK(mean == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(std::abs(var) < 1e-12);
}

TEST_CASE("run converges on a small perturbed connector") {
    const auto p = ComplexPoly::from_roots({{-1, 0}, {1, 0}}, 1.0);
    NumericsConfig cfg;
    cfg.n_points = 80;
    cfg.conv_tol = 1e-3;
    cfg.tau_max = 10.0;
    const auto c = bumped_segment(p, 0, 1, 0.05, 80);
    const auto result = run(c, p, 2, cfg);
    CHECK(result.report.verdict == Verdict::Converged);
    CHECK(result.finals.size() == 1);
    CHECK(result.report.max_sup_increase <= cfg.mp_tol);
    CHECK(result.report.max_inf_decrease <= cfg.mp_tol);
    CHECK(result.report.max_w_increase <= cfg.mp_tol);
    // the limit is the straight segment
    for (const auto& z : result.finals[0].points) CHECK(std::abs(z.imag()) < 2e-3);
}
