#pragma once

#include <functional>
#include <optional>
#include <vector>

namespace knudsen {

using RealFunction = std::function<double(double)>;

/// Legendre polynomial value by the three-term recurrence.
double legendre_eval(int l, double x);

/// Gauss-Legendre rule on (-1, 1): positive weights summing to 2, exact for
/// polynomials up to degree 2*order - 1.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    int order = 0;

    static const QuadratureRule& gauss_legendre(int order);
};

/// Integral of f over [a, b] with a fixed rule mapped to the interval.
double integrate(const RealFunction& f, double a, double b, const QuadratureRule& rule);

/// Adaptive integral of f over [a, b] to absolute tolerance `tol`. The
/// interval is pre-split at any supplied breakpoints (where the integrand is
/// continuous but not smooth) to restore spectral accuracy.
double integrate_adaptive(const RealFunction& f, double a, double b, double tol = 1e-12,
                          const std::vector<double>& breakpoints = {});

/// pi-weighted inner product (1/2) * integral of f*g over (-1, 1).
double inner_product_pi(const RealFunction& f, const RealFunction& g,
                        const std::vector<double>& breakpoints = {}, int order = 512);

struct LegendreSeries {
    std::vector<double> coefficients; // b_l for l = 0..degree

    int degree() const { return static_cast<int>(coefficients.size()) - 1; }
    double eval(double x) const;
    double coeff(int l) const {
        return (l >= 0 && l <= degree()) ? coefficients[static_cast<std::size_t>(l)] : 0.0;
    }
};

/// Expansion f = sum b_l phi_l with b_l = (2l+1) <phi_l, f>_pi.
LegendreSeries expand(const RealFunction& f, int n,
                      const std::vector<double>& breakpoints = {}, int order = 512);

/// Diagonal action of the operator d/dx((1-x^2) d/dx): b_l -> -l(l+1) b_l.
LegendreSeries legendre_operator_apply(const LegendreSeries& series);

/// Series solution of the Poisson equation Lg = -f for mean-zero f, truncated
/// at degree n: a_l = (2l+1)<phi_l,f>_pi / (l(l+1)). With `scale` = h supplied,
/// solves Lg = -f/(2h) instead.
LegendreSeries poisson_solve_series(const RealFunction& f, int n,
                                    std::optional<double> scale = std::nullopt,
                                    const std::vector<double>& breakpoints = {},
                                    int order = 512);

} // namespace knudsen
