#include "slagflow/curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slagflow/errors.hpp"

namespace slagflow {

namespace {

// Fornberg finite-difference weights for derivative `m` at x0 on given nodes.
std::vector<double> fd_weights(double x0, const std::vector<double>& x, int m) {
    const int n = static_cast<int>(x.size());
    std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0;
    double c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k)
                c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = c[i][m];
    return w;
}

Complex apply_weights(const std::vector<Complex>& z, int start, const std::vector<double>& w) {
    Complex v = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) v += w[k] * z[start + static_cast<int>(k)];
    return v;
}

}  // namespace

double MarkedCurve::length() const {
    double L = 0.0;
    for (std::size_t k = 1; k < points.size(); ++k) L += std::abs(points[k] - points[k - 1]);
    return L;
}

std::vector<double> arclengths(const MarkedCurve& c) {
    std::vector<double> s(c.points.size(), 0.0);
    for (std::size_t k = 1; k < c.points.size(); ++k)
        s[k] = s[k - 1] + std::abs(c.points[k] - c.points[k - 1]);
    return s;
}

DifferentialQuantities differential_quantities(const MarkedCurve& c) {
    const int n = c.size();
    if (n < 5) throw TooFewPoints("differential_quantities: need >= 5 points");

    const auto s = arclengths(c);
    DifferentialQuantities q;
    q.unit_tangent.resize(n);
    q.unit_normal.resize(n);
    q.curvature.resize(n);

    auto deriv = [&](int i) -> std::pair<Complex, Complex> {
        int start;
        int stencil;
        if (i == 0 || i == n - 1) {
            stencil = 4;  // one-sided, second order for z''
            start = (i == 0) ? 0 : n - 4;
        } else {
            stencil = 3;
            start = i - 1;
        }
        std::vector<double> nodes(stencil);
        for (int k = 0; k < stencil; ++k) nodes[k] = s[start + k];
        const Complex d1 = apply_weights(c.points, start, fd_weights(s[i], nodes, 1));
        const Complex d2 = apply_weights(c.points, start, fd_weights(s[i], nodes, 2));
        return {d1, d2};
    };

    for (int i = 0; i < n; ++i) {
        const auto [d1, d2] = deriv(i);
        const double sp = std::abs(d1);
        const Complex t = (sp > 0.0) ? d1 / sp : Complex(1.0, 0.0);
        q.unit_tangent[i] = t;
        q.unit_normal[i] = Complex(0.0, 1.0) * t;
        q.curvature[i] = (sp > 0.0)
                             ? (std::conj(d1) * d2).imag() / (sp * sp * sp)
                             : 0.0;
    }
    return q;
}

MarkedCurve resample(const MarkedCurve& c, double target_h) {
    const int n = c.size();
    if (n < 2) return c;
    const auto s = arclengths(c);
    const double L = s.back();
    if (L <= 0.0) return c;

    int m = std::max(2, static_cast<int>(std::lround(L / target_h)) + 1);
    const double h = L / (m - 1);

    // Ghost extension for the Hermite tangents at the ends.
    auto pt = [&](int k) -> Complex {
        if (k < 0) return 2.0 * c.points[0] - c.points[-k];
        if (k >= n) return 2.0 * c.points[n - 1] - c.points[2 * (n - 1) - k];
        return c.points[k];
    };
    auto sv = [&](int k) -> double {
        if (k < 0) return -s[-k];
        if (k >= n) return 2.0 * L - s[2 * (n - 1) - k];
        return s[k];
    };

    MarkedCurve out = c;
    out.points.assign(m, 0.0);
    out.tangents.clear();
    out.points[0] = c.points[0];
    out.points[m - 1] = c.points[n - 1];

    int seg = 0;
    for (int j = 1; j + 1 < m; ++j) {
        const double sj = j * h;
        while (seg + 1 < n - 1 && s[seg + 1] <= sj) ++seg;
        const double s0 = s[seg], s1 = s[seg + 1];
        const double dseg = s1 - s0;
        const double u = (dseg > 0.0) ? (sj - s0) / dseg : 0.0;

        const Complex p0 = c.points[seg], p1 = c.points[seg + 1];
        const Complex m0 = (pt(seg + 1) - pt(seg - 1)) / (sv(seg + 1) - sv(seg - 1)) * dseg;
        const Complex m1 = (pt(seg + 2) - pt(seg)) / (sv(seg + 2) - sv(seg)) * dseg;

        const double u2 = u * u, u3 = u2 * u;
        out.points[j] = (2 * u3 - 3 * u2 + 1) * p0 + (u3 - 2 * u2 + u) * m0 +
                        (-2 * u3 + 3 * u2) * p1 + (u3 - u2) * m1;
    }
    return out;
}

RootProximity min_root_distance(const MarkedCurve& c, const ComplexPoly& p, double end_guard) {
    const auto s = arclengths(c);
    const double L = s.back();
    const auto& roots = p.roots();

    RootProximity best{std::numeric_limits<double>::infinity(), -1, -1};
    for (int i = 1; i + 1 < c.size(); ++i) {
        for (int j = 0; j < static_cast<int>(roots.size()); ++j) {
            if (c.left_root && *c.left_root == j && s[i] < end_guard) continue;
            if (c.right_root && *c.right_root == j && L - s[i] < end_guard) continue;
            const double d = std::abs(c.points[i] - roots[j]);
            if (d < best.distance) best = {d, j, i};
        }
    }
    return best;
}

}  // namespace slagflow
