#include "dispersion.hpp"

#include "lpres/errors.hpp"
#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>

namespace lpres::detail {

namespace {


constexpr double rel_tol = 1e-12;
constexpr unsigned max_depth = 10;
constexpr double abs_target = 1e-9;

// breakpoints inside [lo, hi], dropping any closer than min_gap to a kept neighbour
std::vector<double> sorted_points(std::vector<double> pts, double lo, double hi, double min_gap) {
    std::erase_if(pts, [&](double p) { return !(p > lo && p < hi); });
    std::sort(pts.begin(), pts.end());
    std::vector<double> out{lo};
    for (double p : pts) {
        if (p - out.back() >= min_gap && hi - p >= min_gap) out.push_back(p);
    }
    out.push_back(hi);
    return out;
}

void check(double err, const char* what, double where) {
    if (!(err <= abs_target)) {
        char buf[160];
        std::snprintf(buf, sizeof buf, " quadrature at %.6g did not reach 1e-9 (achieved %.3g)", where, err);
        throw NumericalError(std::string(what) + buf);
    }
}

}  // namespace

ComplexQuad cauchy_numeric(const std::function<double(double)>& r, cplx z, double center, double scale) {
    const double x = z.real();
    const double y = z.imag();
    const double ay = std::abs(y);
    const double L = std::max({std::abs(x - center) + 40.0 * scale, 40.0 * scale, 10.0 * ay, 1.0});
    const double rx = r(x);

    // subtract r(x) on the window so the near-singular part is integrated analytically
    auto inner = [&](double l) { return (r(l) - rx) / (z - l); };
    std::vector<double> bp;
    for (double m : {1.0, 10.0, 100.0}) {
        bp.push_back(x - m * ay);
        bp.push_back(x + m * ay);
    }
    bp.push_back(x);
    for (double m : {0.0, 1.0, 3.0, 10.0}) {
        bp.push_back(center - m * scale);
        bp.push_back(center + m * scale);
    }
    const auto pts = sorted_points(bp, x - L, x + L, 1e-3 * std::min(scale, ay));

    ComplexQuad out;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        double e = 0.0;
        out.value += integrate_gk(inner, pts[i], pts[i + 1], max_depth, rel_tol, &e);
        out.error += e;
    }
    out.value += rx * (std::log(z - x + L) - std::log(z - x - L));

    const double inf = std::numeric_limits<double>::infinity();
    auto tail = [&](double l) { return r(l) / (z - l); };
    double e = 0.0;
    out.value += integrate_gk(tail, x + L, inf, max_depth, rel_tol, &e);
    out.error += e;
    out.value += integrate_gk(tail, -inf, x - L, max_depth, rel_tol, &e);
    out.error += e;
    check(out.error, "Cauchy transform", x);
    return out;
}

RealQuad pv_numeric(const std::function<double(double)>& r, double sigma, double center, double scale) {
    auto f = [&](double t) { return (r(sigma - t) - r(sigma + t)) / t; };
    const double d = std::abs(sigma - center);
    const double T = d + 40.0 * scale;
    std::vector<double> bp;
    for (double m : {0.0, 1.0, 3.0, 10.0}) {
        bp.push_back(d - m * scale);
        bp.push_back(d + m * scale);
    }
    bp.push_back(std::min(scale, 0.5 * T));
    const auto pts = sorted_points(bp, 0.0, T, 1e-3 * scale);
    RealQuad out;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        double e = 0.0;
        out.value += integrate_gk(f, pts[i], pts[i + 1], max_depth, rel_tol, &e);
        out.error += e;
    }
    double e = 0.0;
    out.value += integrate_gk(f, T, std::numeric_limits<double>::infinity(), max_depth,
                                                      rel_tol, &e);
    out.error += e;
    check(out.error, "principal-value", sigma);
    return out;
}

cplx cauchy_table(const std::vector<double>& lam, const std::vector<double>& val, cplx z) {
    cplx sum = 0.0;
    for (std::size_t i = 0; i + 1 < lam.size(); ++i) {
        const double s = (val[i + 1] - val[i]) / (lam[i + 1] - lam[i]);
        const cplx A = val[i] + s * (z - lam[i]);
        sum += A * (std::log(z - lam[i]) - std::log(z - lam[i + 1])) - s * (lam[i + 1] - lam[i]);
    }
    return sum;
}

double pv_table(const std::vector<double>& lam, const std::vector<double>& val, double sigma) {
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < lam.size(); ++i) {
        const double s = (val[i + 1] - val[i]) / (lam[i + 1] - lam[i]);
        const double A = val[i] + s * (sigma - lam[i]);
        const double u0 = std::abs(sigma - lam[i]);
        const double u1 = std::abs(sigma - lam[i + 1]);
        // log singularities at an interior node cancel between neighbouring segments
        const double l0 = u0 > 0.0 ? std::log(u0) : 0.0;
        const double l1 = u1 > 0.0 ? std::log(u1) : 0.0;
        sum += A * (l0 - l1) - s * (lam[i + 1] - lam[i]);
    }
    return sum;
}

cplx cauchy_table_dz(const std::vector<double>& lam, const std::vector<double>& val, cplx z) {
    // d/dz C = \int rho'/(z-l) dl - [rho/(z-l)] over the table range
    cplx sum = 0.0;
    for (std::size_t i = 0; i + 1 < lam.size(); ++i) {
        const double s = (val[i + 1] - val[i]) / (lam[i + 1] - lam[i]);
        sum += s * (std::log(z - lam[i]) - std::log(z - lam[i + 1]));
    }
    sum -= val.back() / (z - lam.back()) - val.front() / (z - lam.front());
    return sum;
}

}  // namespace lpres::detail
