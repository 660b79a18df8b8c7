#include "slagflow/complex_poly.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "slagflow/errors.hpp"

namespace slagflow {

namespace {

Complex horner(const std::vector<Complex>& c, Complex t) {
    Complex v = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * t + *it;
    return v;
}

double max_coeff_abs(const std::vector<Complex>& c) {
    double m = 0.0;
    for (const auto& a : c) m = std::max(m, std::abs(a));
    return m;
}

void check_simple(const std::vector<Complex>& roots, double sep_tol) {
    for (std::size_t i = 0; i < roots.size(); ++i)
        for (std::size_t j = i + 1; j < roots.size(); ++j)
            if (std::abs(roots[i] - roots[j]) <= sep_tol)
                throw DegenerateRoots("roots closer than sep_tol: p has a non-simple zero");
}

}  // namespace

std::vector<Complex> find_roots(const std::vector<Complex>& coeffs, const NumericsConfig& cfg) {
    if (coeffs.size() < 2) throw ConfigError("find_roots: degree must be >= 1");
    if (std::abs(coeffs.back()) == 0.0) throw ConfigError("find_roots: leading coefficient is zero");

    const int n = static_cast<int>(coeffs.size()) - 1;
    const Complex lead = coeffs.back();

    // Companion matrix eigenvalues, then a few Newton polish sweeps.
    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) companion(i, n - 1) = -coeffs[i] / lead;

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
    std::vector<Complex> roots(n);
    for (int i = 0; i < n; ++i) roots[i] = solver.eigenvalues()(i);

    std::vector<Complex> dcoeffs(n);
    for (int i = 1; i <= n; ++i) dcoeffs[i - 1] = coeffs[i] * static_cast<double>(i);
    for (auto& z : roots) {
        for (int it = 0; it < 8; ++it) {
            Complex pv = horner(coeffs, z);
            Complex dv = horner(dcoeffs, z);
            if (std::abs(dv) == 0.0) break;
            Complex dz = pv / dv;
            z -= dz;
            if (std::abs(dz) < 1e-15 * (1.0 + std::abs(z))) break;
        }
    }

    const double scale = 1.0 + max_coeff_abs(coeffs);
    for (const auto& z : roots)
        if (std::abs(horner(coeffs, z)) >= cfg.root_tol * scale)
            throw DegenerateRoots("root residual above root_tol");
    check_simple(roots, cfg.sep_tol);

    std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return roots;
}

ComplexPoly ComplexPoly::from_coeffs(std::vector<Complex> coeffs, const NumericsConfig& cfg) {
    while (coeffs.size() > 1 && std::abs(coeffs.back()) == 0.0) coeffs.pop_back();
    auto roots = find_roots(coeffs, cfg);
    return ComplexPoly(std::move(coeffs), std::move(roots));
}

ComplexPoly ComplexPoly::from_roots(const std::vector<Complex>& roots, Complex leading,
                                    const NumericsConfig& cfg) {
    if (roots.empty()) throw ConfigError("from_roots: need at least one root");
    if (std::abs(leading) == 0.0) throw ConfigError("from_roots: leading coefficient is zero");
    check_simple(roots, cfg.sep_tol);
    std::vector<Complex> coeffs{leading};
    for (const auto& z : roots) {
        coeffs.push_back(0.0);
        for (std::size_t i = coeffs.size() - 1; i >= 1; --i)
            coeffs[i] = coeffs[i - 1] - z * coeffs[i];
        coeffs[0] *= -z;
    }
    std::vector<Complex> sorted = roots;
    std::sort(sorted.begin(), sorted.end(), [](Complex a, Complex b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return ComplexPoly(std::move(coeffs), std::move(sorted));
}

Complex ComplexPoly::eval(Complex t) const { return horner(coeffs_, t); }

std::pair<Complex, Complex> ComplexPoly::eval_with_derivative(Complex t) const {
    Complex p = 0.0, dp = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
        dp = dp * t + p;
        p = p * t + *it;
    }
    return {p, dp};
}

void ComplexPoly::eval2(Complex t, Complex& p, Complex& dp, Complex& ddp) const {
    p = dp = ddp = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
        ddp = ddp * t + dp;
        dp = dp * t + p;
        p = p * t + *it;
    }
    ddp *= 2.0;
}

double ComplexPoly::root_separation() const {
    double sep = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < roots_.size(); ++i)
        for (std::size_t j = i + 1; j < roots_.size(); ++j)
            sep = std::min(sep, std::abs(roots_[i] - roots_[j]));
    return sep;
}

double ComplexPoly::root_diameter() const {
    double d = 0.0;
    for (std::size_t i = 0; i < roots_.size(); ++i)
        for (std::size_t j = i + 1; j < roots_.size(); ++j)
            d = std::max(d, std::abs(roots_[i] - roots_[j]));
    return d;
}

std::vector<Complex> branch_power(const ComplexPoly& p, const std::vector<Complex>& path,
                                  double alpha) {
    std::vector<Complex> out(path.size());
    if (path.empty()) return out;

    double arg = std::arg(p.eval(path[0]));
    for (std::size_t k = 0; k < path.size(); ++k) {
        const Complex pv = p.eval(path[k]);
        const double raw = std::arg(pv);
        if (k > 0) {
            const double jump = wrap_angle(raw - arg);
            if (std::abs(jump) >= kPi / 2.0)
                throw BranchStep("arg jump >= pi/2 between samples: under-resolved path or root crossing");
            arg += jump;
        }
        out[k] = std::pow(std::abs(pv), alpha) * std::exp(Complex(0.0, alpha * arg));
    }
    return out;
}

}  // namespace slagflow
