#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "slagflow/complex_poly.hpp"
#include "slagflow/curve.hpp"
#include "slagflow/errors.hpp"
#include "slagflow/floer.hpp"
#include "slagflow/geometry.hpp"
#include "slagflow/numerics.hpp"

using namespace slagflow;

namespace {

MarkedCurve chord_curve(const ComplexPoly& p, int a, int b, int N = 200) {
    MarkedCurve c;
    const Complex za = p.roots()[a], zb = p.roots()[b];
    c.points.resize(N);
    for (int k = 0; k < N; ++k) c.points[k] = za + (zb - za) * (double(k) / (N - 1));
    c.left_root = a;
    c.right_root = b;
    return c;
}

}  // namespace

TEST_CASE("floer index basics") {
    // the symmetric model alpha_i = pi/n with theta1 = 0 has index 1
    for (int n : {2, 3, 4, 6}) {
        GradedIntersection x;
        x.n = n;
        x.alphas.assign(n, kPi / n);
        x.theta1 = 0.0;
        CHECK(floer_index(x) == 1);
        CHECK(gradable_connect_sum(x));
    }
    // regrading L1 by -2*pi shifts the index by 2
    GradedIntersection y;
    y.n = 3;
    y.alphas = {0.4, 1.1, kPi - 1.5 + 0.6};  // sums to pi + 0.6
    y.theta1 = 0.6;
    CHECK(floer_index(y) == 1);
    y.theta1 -= 2.0 * kPi;
    CHECK(floer_index(y) == 3);
    CHECK_FALSE(gradable_connect_sum(y));
}

TEST_CASE("floer index duality k + k' = n on random valid data") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> unit(0.05, kPi - 0.05);
    std::uniform_int_distribution<int> dims(2, 6);
    for (int trial = 0; trial < 1000; ++trial) {
        GradedIntersection x;
        x.n = dims(rng);
        double sum = 0.0;
        for (int i = 0; i < x.n; ++i) {
            x.alphas.push_back(unit(rng));
            sum += x.alphas.back();
        }
        std::uniform_int_distribution<int> ks(-3, 3);
        const int k = ks(rng);
        x.theta1 = sum - kPi * k;
        CHECK(floer_index(x) == k);
        GradedIntersection dual;
        dual.n = x.n;
        for (double a : x.alphas) dual.alphas.push_back(kPi - a);
        dual.theta1 = -x.theta1;
        CHECK(floer_index(x) + floer_index(dual) == x.n);
    }
}

TEST_CASE("floer index input validation") {
    GradedIntersection x;
    x.n = 2;
    x.alphas = {0.5, 0.7};
    x.theta1 = 0.3;  // (1.2 - 0.3)/pi is not an integer
    CHECK_THROWS_AS(floer_index(x), NotIntegral);
    x.alphas = {-0.1, 0.5};
    x.theta1 = 0.4 - kPi;
    CHECK_THROWS_AS(floer_index(x), Error);
}

TEST_CASE("winding vector of chords and loops") {
    const auto p = ComplexPoly::from_roots({{-1, 0}, {0, 1}, {1, 0}}, 1.0);
    const auto chord = chord_curve(p, 0, 2);
    const auto w0 = winding_vector(chord.points, p);
    CHECK(w0 == std::vector<int>({0, 0, 0}));

    // detour once counter-clockwise around the middle root
    std::vector<Complex> path;
    for (int k = 0; k <= 100; ++k) path.push_back(Complex(-1.0 + 1.0 * k / 100, 0.0));
    for (int k = 1; k <= 200; ++k) {
        const double a = -kPi / 2.0 + 2.0 * kPi * k / 200.0;
        path.push_back(Complex(0, 1) + 1.2 * std::exp(Complex(0.0, a)));
    }
    for (int k = 1; k <= 100; ++k) path.push_back(Complex(0.2 + 0.8 * k / 100, -0.2 * std::sin(kPi * k / 100.0)));
    const auto w1 = winding_vector(path, p);
    CHECK(w1[1] == 1);
    CHECK(w1[0] == 0);
    CHECK(w1[2] == 0);
}

TEST_CASE("lag_class_of the straight connector") {
    const auto p = ComplexPoly::from_roots({{-1, 0}, {1, 0}}, 1.0);
    const auto c = chord_curve(p, 0, 1);
    const auto L = lag_class_of(c, p, 3);
    CHECK(L.root_pair == std::pair<int, int>(0, 1));
    CHECK(L.winding == std::vector<int>({0, 0}));
    CHECK(std::abs(std::abs(L.period) - kPi / 2.0) < 1e-9);
    CHECK(std::abs(L.period.real()) < 1e-9);
}

TEST_CASE("splittings are graded and period-additive") {
    const auto p = ComplexPoly::from_roots({{-1, 0}, {0, 0.2}, {1, 0}}, 1.0);
    const auto c = chord_curve(p, 0, 2);
    const auto L = lag_class_of(c, p, 3);
    const auto splits = enumerate_splittings(L, p, 3, 1);
    REQUIRE(!splits.empty());
    for (const auto& [s1, s2] : splits) {
        CHECK(std::abs(s1.period + s2.period - L.period) <
              1e-8 * (1.0 + std::abs(L.period)));
        // graded: piece phases are lifted near the parent's phase
        CHECK(std::abs(s1.phi - L.phi) < kPi);
        CHECK(std::abs(s2.phi - L.phi) < kPi);
    }
}

TEST_CASE("stability is side-sensitive") {
    NumericsConfig cfg;
    // the chord [-1,1] passes below a root at 0.2i: destabilised
    const auto above = ComplexPoly::from_roots({{-1, 0}, {0, 0.2}, {1, 0}}, 1.0);
    const auto ca = chord_curve(above, 0, 2);
    const auto ra = check_stability(ca, above, 3, 1, cfg);
    CHECK_FALSE(ra.close_all);
    CHECK_FALSE(ra.vclose_all);

    // mirrored root below: the same chord is stable
    const auto below = ComplexPoly::from_roots({{-1, 0}, {0, -0.2}, {1, 0}}, 1.0);
    const auto cb = chord_curve(below, 0, 2);
    const auto rb = check_stability(cb, below, 3, 1, cfg);
    CHECK(rb.close_all);
    CHECK(rb.vclose_all);
}

TEST_CASE("jordan_holder: stable classes are already simple") {
    const auto p = ComplexPoly::from_roots({{-1, 0}, {0, -0.2}, {1, 0}}, 1.0);
    const auto L = lag_class_of(chord_curve(p, 0, 2), p, 3);
    const auto pieces = jordan_holder(L, p, 3, 1);
    REQUIRE(pieces.size() == 1);
    CHECK(pieces[0].root_pair == L.root_pair);
    CHECK(pieces[0].phi == doctest::Approx(L.phi).epsilon(1e-12));
}

TEST_CASE("jordan_holder: destabilised chord splits with decreasing phases") {
    const auto p = ComplexPoly::from_roots({{-1, 0}, {0, 0.2}, {1, 0}}, 1.0);
    const auto L = lag_class_of(chord_curve(p, 0, 2), p, 3);
    const auto pieces = jordan_holder(L, p, 3, 1);
    REQUIRE(pieces.size() == 2);
    for (std::size_t i = 1; i < pieces.size(); ++i)
        CHECK(pieces[i - 1].phi >= pieces[i].phi - 1e-12);
    Complex total = 0.0;
    for (const auto& piece : pieces) total += piece.period;
    CHECK(std::abs(total - L.period) < 1e-8 * (1.0 + std::abs(L.period)));
    // the split runs through the middle root, covering all three
    auto touches = [](const LagClass& piece, int r) {
        return piece.root_pair.first == r || piece.root_pair.second == r;
    };
    CHECK(touches(pieces[0], 1));
    CHECK(touches(pieces[1], 1));
    CHECK((touches(pieces[0], 0) || touches(pieces[1], 0)));
    CHECK((touches(pieces[0], 2) || touches(pieces[1], 2)));
}
