#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace mcrd {

namespace detail {

// boost's recursion test multiplies the requested tolerance by the local
// interval half-length before comparing with an unscaled error estimate, so
// the tolerance that enforces a relative accuracy r on [a,b] is 2r/(b-a).
// The epsilon floor keeps roundoff-dominated panels from subdividing forever.
template <class F>
double gk_integrate(const F& f, double a, double b, double tol) {
    using boost::math::quadrature::gauss_kronrod;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const double len = std::abs(b - a);
    const double pass = 2.0 / len * std::max(tol, 8.0 * eps);
    double error = 0.0;
    return gauss_kronrod<double, 31>::integrate(f, a, b, 14, pass, &error);
}

}  // namespace detail

// Adaptive Gauss-Kronrod to a relative tolerance.
template <class F>
double integrate_rel(const F& f, double a, double b, double rel_tol = 1e-14) {
    if (a == b) return 0.0;
    return detail::gk_integrate(f, a, b, rel_tol);
}

// Adaptive Gauss-Kronrod for the O(1)-length area integrals whose tolerance
// the contracts state absolutely. Their integrands and values are O(1), so the
// absolute target is enforced through the relative machinery.
template <class F>
double integrate(const F& f, double a, double b, double abs_tol = 1e-13) {
    if (a == b) return 0.0;
    return detail::gk_integrate(f, a, b, abs_tol);
}

}  // namespace mcrd
