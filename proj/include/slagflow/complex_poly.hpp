#ifndef SLAGFLOW_COMPLEX_POLY_HPP
#define SLAGFLOW_COMPLEX_POLY_HPP

#include <utility>
#include <vector>

#include "slagflow/numerics.hpp"

namespace slagflow {

/// Find all complex roots of the polynomial with the given coefficients
/// (ascending degree). Throws DegenerateRoots if two roots come closer
/// than cfg.sep_tol.
std::vector<Complex> find_roots(const std::vector<Complex>& coeffs,
                                const NumericsConfig& cfg = {});

/// The polynomial p(t) with simple roots; source of all geometry.
/// Immutable after construction; roots are found and cached once.
class ComplexPoly {
  public:
    static ComplexPoly from_coeffs(std::vector<Complex> coeffs,
                                   const NumericsConfig& cfg = {});
    static ComplexPoly from_roots(const std::vector<Complex>& roots,
                                  Complex leading,
                                  const NumericsConfig& cfg = {});

    Complex eval(Complex t) const;

    /// Horner evaluation of p and p' in one pass.
    std::pair<Complex, Complex> eval_with_derivative(Complex t) const;

    /// p, p', p'' at t (p'' feeds the double-cover velocity route).
    void eval2(Complex t, Complex& p, Complex& dp, Complex& ddp) const;

    const std::vector<Complex>& coeffs() const { return coeffs_; }
    const std::vector<Complex>& roots() const { return roots_; }
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }

    /// Minimum pairwise distance between roots.
    double root_separation() const;
    /// Diameter of the root set (0 for a single root).
    double root_diameter() const;

  private:
    ComplexPoly(std::vector<Complex> coeffs, std::vector<Complex> roots)
        : coeffs_(std::move(coeffs)), roots_(std::move(roots)) {}

    std::vector<Complex> coeffs_;  // ascending degree, leading nonzero
    std::vector<Complex> roots_;
};

/// Continuous branch of p(path[k])^alpha along a path avoiding roots.
/// out[0] is the principal branch at path[0]; the arg of p is continued
/// by nearest-branch selection per step. Throws BranchStep on an arg jump
/// >= pi/2 between consecutive samples.
std::vector<Complex> branch_power(const ComplexPoly& p,
                                  const std::vector<Complex>& path,
                                  double alpha);

}  // namespace slagflow

#endif
