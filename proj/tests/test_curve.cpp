#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "slagflow/complex_poly.hpp"
#include "slagflow/curve.hpp"
#include "slagflow/errors.hpp"
#include "slagflow/numerics.hpp"

using namespace slagflow;

namespace {

MarkedCurve circle_arc(Complex center, double R, double a0, double a1, int N) {
    MarkedCurve c;
    c.points.resize(N);
    for (int k = 0; k < N; ++k) {
        const double a = a0 + (a1 - a0) * k / (N - 1);
        c.points[k] = center + R * std::exp(Complex(0.0, a));
    }
    return c;
}

double hausdorff_to_circle(const MarkedCurve& c, Complex center, double R) {
    double worst = 0.0;
    for (const auto& z : c.points) worst = std::max(worst, std::abs(std::abs(z - center) - R));
    return worst;
}

}  // namespace

TEST_CASE("differential quantities on a circle") {
    const double R = 1.7;
    const auto c = circle_arc({0.4, -0.3}, R, 0.2, 2.1, 301);
    const auto dq = differential_quantities(c);
    for (int k = 0; k < c.size(); ++k) {
        // traversal is counter-clockwise: curvature +1/R toward i*tangent
        CHECK(dq.curvature[k] == doctest::Approx(1.0 / R).epsilon(1e-4));
        CHECK(std::abs(dq.unit_normal[k] - Complex(0, 1) * dq.unit_tangent[k]) < 1e-14);
        const double a = 0.2 + (2.1 - 0.2) * k / (c.size() - 1);
        const Complex tan_exact = Complex(0, 1) * std::exp(Complex(0.0, a));
        CHECK(std::abs(dq.unit_tangent[k] - tan_exact) < 1e-5);
    }
}

TEST_CASE("straight lines have zero curvature, reversal negates curvature") {
    MarkedCurve line;
    for (int k = 0; k < 40; ++k)
        line.points.push_back(Complex(-1.0 + 0.05 * k, 0.3 * (-1.0 + 0.05 * k)));
    const auto dq = differential_quantities(line);
    for (double kap : dq.curvature) CHECK(std::abs(kap) < 1e-12);

    auto arc = circle_arc({0, 0}, 1.0, 0.0, 1.0, 81);
    MarkedCurve rev;
    rev.points.assign(arc.points.rbegin(), arc.points.rend());
    const auto f = differential_quantities(arc);
    const auto b = differential_quantities(rev);
    const int N = arc.size();
    for (int k = 2; k < N - 2; ++k)
        CHECK(f.curvature[k] == doctest::Approx(-b.curvature[N - 1 - k]).epsilon(1e-8));
}

TEST_CASE("parabola vertex curvature") {
    MarkedCurve c;
    for (int k = 0; k < 201; ++k) {
        const double x = -0.5 + 0.005 * k;
        c.points.push_back(Complex(x, x * x));
    }
    const auto dq = differential_quantities(c);
    // kappa(x) = 2 / (1 + 4x^2)^{3/2}; vertex at index 100
    CHECK(dq.curvature[100] == doctest::Approx(2.0).epsilon(1e-4));
}

TEST_CASE("differential_quantities rejects tiny curves") {
    MarkedCurve c;
    c.points = {{0, 0}, {1, 0}, {2, 0}, {3, 0}};
    CHECK_THROWS_AS(differential_quantities(c), TooFewPoints);
}

TEST_CASE("resample equidistributes and preserves the geometry") {
    auto c = circle_arc({0, 0}, 2.0, 0.1, 2.8, 90);
    // lopside the parametrisation
    for (int k = 0; k < c.size(); ++k) {
        const double u = double(k) / (c.size() - 1);
        const double v = u * u;
        c.points[k] = 2.0 * std::exp(Complex(0.0, 0.1 + 2.7 * v));
    }
    const auto r = resample(c, 0.05);
    CHECK(std::abs(r.points.front() - c.points.front()) < 1e-13);
    CHECK(std::abs(r.points.back() - c.points.back()) < 1e-13);
    CHECK(hausdorff_to_circle(r, {0, 0}, 2.0) < 1e-3);  // input-resolution limited
    const auto s = arclengths(r);
    const double h = s.back() / (r.size() - 1);
    for (int k = 1; k < r.size(); ++k)
        CHECK(std::abs(s[k] - s[k - 1] - h) < 0.02 * h);
}

TEST_CASE("min_root_distance honours the end guard") {
    const auto p = ComplexPoly::from_roots({{-1, 0}, {1, 0}}, 1.0);
    MarkedCurve c;
    const int N = 101;
    for (int k = 0; k < N; ++k) c.points.push_back(Complex(-1.0 + 2.0 * k / (N - 1), 0.1));
    c.points.front() = {-1, 0};
    c.points.back() = {1, 0};
    c.left_root = 0;
    c.right_root = 1;
    const auto prox = min_root_distance(c, p, 0.3);
    // guarded: points within arclength 0.3 of a pinned end don't count
    // against its root, so the minimum moves well past the bump height
    CHECK(prox.distance > 0.15);
    // an unpinned curve diving at a root is seen immediately
    MarkedCurve d = c;
    d.left_root.reset();
    d.right_root.reset();
    const auto prox2 = min_root_distance(d, p, 0.3);
    CHECK(prox2.distance > 0.09);
    CHECK(prox2.distance < 0.11);
}

TEST_CASE("length and arclengths are consistent") {
    const auto c = circle_arc({0, 0}, 1.0, 0.0, kPi, 2001);
    CHECK(c.length() == doctest::Approx(kPi).epsilon(1e-6));
    const auto s = arclengths(c);
    CHECK(s.front() == 0.0);
    CHECK(s.back() == doctest::Approx(c.length()).epsilon(1e-14));
}
