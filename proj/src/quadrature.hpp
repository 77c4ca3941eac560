#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>

namespace lpres::detail {

// Adaptive 61-point Gauss-Kronrod with interval errors in the units of the
// integral. Boost 1.74's adaptive driver reports each interval's error without
// the half-width factor, overstating it on short intervals and understating it
// on long ones; here only its single-panel rule is used.
template <class F>
auto gk_panel(const F& f, double a, double b, unsigned depth, double abs_tol, double rel_tol, double& error)
    -> decltype(f(a)) {
    using boost::math::quadrature::gauss_kronrod;
    double e = 0.0;
    const auto v = gauss_kronrod<double, 61>::integrate(f, a, b, 0, 0.0, &e);
    e *= 0.5 * (b - a);
    if (abs_tol < 0.0) abs_tol = rel_tol * std::abs(v);
    if (depth == 0 || e <= abs_tol || e <= rel_tol * std::abs(v)) {
        error += e;
        return v;
    }
    const double mid = 0.5 * (a + b);
    return gk_panel(f, a, mid, depth - 1, 0.5 * abs_tol, rel_tol, error) +
           gk_panel(f, mid, b, depth - 1, 0.5 * abs_tol, rel_tol, error);
}

template <class F>
auto integrate_gk(const F& f, double a, double b, unsigned max_depth, double rel_tol, double* error = nullptr)
    -> decltype(f(a)) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    double e = 0.0;
    decltype(f(a)) v{};
    if (a == -inf && b == inf) {
        v = integrate_gk(f, -inf, 0.0, max_depth, rel_tol, &e);
        double e2 = 0.0;
        v += integrate_gk(f, 0.0, inf, max_depth, rel_tol, &e2);
        e += e2;
    } else if (b == inf) {
        // x = a + t/(1 - t); Gauss-Kronrod nodes never touch t = 1
        auto g = [&](double t) { return f(a + t / (1.0 - t)) / ((1.0 - t) * (1.0 - t)); };
        v = gk_panel(g, 0.0, 1.0, max_depth, -1.0, rel_tol, e);
    } else if (a == -inf) {
        auto g = [&](double t) { return f(b - t / (1.0 - t)) / ((1.0 - t) * (1.0 - t)); };
        v = gk_panel(g, 0.0, 1.0, max_depth, -1.0, rel_tol, e);
    } else {
        v = gk_panel(f, a, b, max_depth, -1.0, rel_tol, e);
    }
    if (error) *error = e;
    return v;
}

}  // namespace lpres::detail
