#include "lpres/survival.hpp"

#include "lpres/errors.hpp"
#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <tbb/parallel_for.h>

namespace lpres {

namespace {

constexpr double pi = std::numbers::pi;


double inside_table(const SpectralDensity& d, double l) {
    return !d.is_table() || (l >= d.table_lambdas().front() && l <= d.table_lambdas().back());
}

double rho_at(const SpectralDensity& d, double l) { return inside_table(d, l) ? d.value(l) : 0.0; }

double width_estimate(const ModelParameters& params, const SpectralDensity& density) {
    return std::max(2.0 * pi * rho_at(density, params.omega_V), 1e-3);
}

double remainder_integral(const SpectralMeasure& m, double a, double b, bool absolute) {
    auto f = [&](double l) {
        const double r = m.weight(l) - m.model(l);
        return absolute ? std::abs(r) : r;
    };
    double err = 0.0;
    return detail::integrate_gk(f, a, b, 12, 1e-11, &err);
}

std::vector<double> breakpoints(const SpectralMeasure& m, double lo, double hi) {
    const double c1 = m.params.omega_V;
    const double c2 = m.density.center();
    const double s1 = width_estimate(m.params, m.density);
    const double s2 = m.density.scale();
    std::vector<double> pts{lo, hi};
    for (double k : {0.0, 1.0, 3.0, 10.0, 30.0}) {
        for (double sgn : {-1.0, 1.0}) {
            pts.push_back(c1 + sgn * k * s1);
            pts.push_back(c2 + sgn * k * s2);
        }
    }
    std::erase_if(pts, [&](double p) { return !(p >= lo && p <= hi); });
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

}  // namespace

double SpectralMeasure::weight(double lambda) const {
    const double r = rho_at(density, lambda);
    if (r == 0.0) return 0.0;
    const cplx h = h_boundary(params, density, lambda).h_plus;
    return r / std::norm(h);
}

double SpectralMeasure::model(double lambda) const {
    if (model_amplitude == 0.0) return 0.0;
    const double x = lambda - model_center;
    return model_amplitude * model_width / pi / (x * x + model_width * model_width);
}

MeasureGrid default_measure_grid(const ModelParameters& params, const SpectralDensity& density) {
    const double gam = width_estimate(params, density);
    const double feature = std::min({density.scale(), gam, 1.0});
    const double h = feature / 16.0;
    const double lo0 = std::min(params.omega_V, density.center());
    const double hi0 = std::max(params.omega_V, density.center());
    double L = std::max(40.0 * std::max(density.scale(), gam), 10.0);
    if (density.is_table()) {
        L = std::max(L, std::max(std::abs(density.table_lambdas().front() - lo0),
                                 std::abs(density.table_lambdas().back() - hi0)) + 1.0);
    }

    // widen until the remainder mass outside the window is negligible
    SpectralMeasure probe;
    probe.params = params;
    probe.density = density;
    const double cinf = params.g == 0.0 ? 0.0 : density.asymptotic_constant();
    if (cinf > 0.0) {
        probe.model_width = pi * cinf;
        probe.model_amplitude = 1.0;
        probe.model_center = params.omega_V + h_boundary(params, density, params.omega_V).pv_part;
    }
    const double inf = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 20; ++it) {
        const double tail = remainder_integral(probe, hi0 + L, inf, true) + remainder_integral(probe, -inf, lo0 - L, true);
        if (tail < 1e-10) break;
        L *= 2.0;
    }
    MeasureGrid g;
    g.lo = lo0 - L;
    g.hi = hi0 + L;
    g.n = static_cast<std::size_t>(std::ceil((g.hi - g.lo) / h)) + 1;
    return g;
}

SpectralMeasure spectral_measure(const ModelParameters& params, const SpectralDensity& density,
                                 const MeasureGrid& grid) {
    if (grid.n < 3 || !(grid.hi > grid.lo)) throw ValidationError("measure grid needs n >= 3 and hi > lo");
    if (params.g == 0.0) throw NumericalError("bound state present: measure incomplete (decoupled level)");
    SpectralMeasure m;
    m.params = params;
    m.density = density;
    const double cinf = density.asymptotic_constant();
    if (cinf > 0.0) {
        m.model_width = pi * cinf;
        m.model_amplitude = 1.0;
        m.model_center = params.omega_V + h_boundary(params, density, params.omega_V).pv_part;
    }

    const std::size_t n = grid.n;
    m.grid.resize(n);
    m.weights.resize(n);
    std::vector<double> re_h(n, 0.0);
    std::vector<char> real_line(n, 0);
    const double step = (grid.hi - grid.lo) / static_cast<double>(n - 1);
    tbb::parallel_for(std::size_t{0}, n, [&](std::size_t i) {
        const double l = grid.lo + step * static_cast<double>(i);
        m.grid[i] = l;
        const double r = rho_at(density, l);
        const cplx h = inside_table(density, l) ? h_boundary(params, density, l).h_plus : cplx(l - params.omega_V);
        if (std::abs(h.imag()) <= 1e-14 * (1.0 + std::abs(l))) real_line[i] = 1;
        re_h[i] = h.real();
        m.weights[i] = r == 0.0 ? 0.0 : r / std::norm(h);
    });
    for (std::size_t i = 1; i < n; ++i) {
        if (real_line[i] && real_line[i - 1] && (re_h[i] == 0.0 || (re_h[i] > 0.0) != (re_h[i - 1] > 0.0))) {
            throw NumericalError("bound state present: measure incomplete (real zero of h near lambda = " +
                                 std::to_string(m.grid[i]) + ")");
        }
    }

    const auto pts = breakpoints(m, grid.lo, grid.hi);
    double mass = m.model_amplitude;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) mass += remainder_integral(m, pts[i], pts[i + 1], false);
    const double inf = std::numeric_limits<double>::infinity();
    const double hi_tail = remainder_integral(m, grid.hi, inf, false);
    const double lo_tail = remainder_integral(m, -inf, grid.lo, false);
    m.total_mass = mass + hi_tail + lo_tail;
    m.tail_mass = remainder_integral(m, grid.hi, inf, true) + remainder_integral(m, -inf, grid.lo, true);
    return m;
}

SpectralMeasure spectral_measure(const ModelParameters& params, const SpectralDensity& density) {
    if (params.g == 0.0) throw NumericalError("bound state present: measure incomplete (decoupled level)");
    return spectral_measure(params, density, default_measure_grid(params, density));
}

std::vector<cplx> survival_amplitudes(const SpectralMeasure& measure, std::span<const double> taus,
                                      const AmplitudeOptions& options) {
    std::vector<cplx> out(taus.size());
    if (taus.empty()) return out;
    std::vector<double> lam = measure.grid;
    std::vector<double> rem(lam.size());
    for (std::size_t i = 0; i < lam.size(); ++i) rem[i] = measure.weights[i] - measure.model(lam[i]);

    auto trapezoid = [&](double tau) {
        const double h = lam[1] - lam[0];
        cplx sum = 0.0;
        for (std::size_t i = 0; i < lam.size(); ++i) {
            const double wgt = (i == 0 || i + 1 == lam.size()) ? 0.5 : 1.0;
            sum += wgt * rem[i] * std::polar(1.0, -lam[i] * tau);
        }
        return h * sum;
    };

    double tmax = 0.0;
    for (double t : taus) tmax = std::max(tmax, std::abs(t));
    cplx prev = trapezoid(tmax);
    for (;;) {
        if (2 * lam.size() - 1 > options.max_points) {
            throw NumericalError("under-resolved oscillation at tau = " + std::to_string(tmax) +
                                 ": lambda grid exceeds " + std::to_string(options.max_points) + " points");
        }
        const std::size_t n = lam.size();
        std::vector<double> mid(n - 1), mid_rem(n - 1);
        tbb::parallel_for(std::size_t{0}, n - 1, [&](std::size_t i) {
            mid[i] = 0.5 * (lam[i] + lam[i + 1]);
            mid_rem[i] = measure.weight(mid[i]) - measure.model(mid[i]);
        });
        std::vector<double> lam2(2 * n - 1), rem2(2 * n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            lam2[2 * i] = lam[i];
            rem2[2 * i] = rem[i];
            if (i + 1 < n) {
                lam2[2 * i + 1] = mid[i];
                rem2[2 * i + 1] = mid_rem[i];
            }
        }
        lam.swap(lam2);
        rem.swap(rem2);
        const cplx cur = trapezoid(tmax);
        const bool done = std::abs(cur - prev) < options.refine_tol;
        prev = cur;
        if (done) break;
    }

    tbb::parallel_for(std::size_t{0}, taus.size(), [&](std::size_t k) {
        const double t = taus[k];
        cplx a = trapezoid(t);
        if (measure.model_amplitude != 0.0) {
            a += measure.model_amplitude * std::exp(cplx(-measure.model_width * std::abs(t), -measure.model_center * t));
        }
        out[k] = a;
    });
    return out;
}

cplx survival_amplitude(const SpectralMeasure& measure, double tau, const AmplitudeOptions& options) {
    const double t[] = {tau};
    return survival_amplitudes(measure, t, options)[0];
}

double semigroup_defect(const SpectralMeasure& measure, double tau1, double tau2, const AmplitudeOptions& options) {
    if (tau1 < 0.0 || tau2 < 0.0) throw ValidationError("semigroup_defect needs nonnegative times");
    if (tau1 == 0.0 || tau2 == 0.0) return 0.0;  // A(0) = 1 by normalization of the state
    const double t[] = {tau1, tau2, tau1 + tau2};
    const auto a = survival_amplitudes(measure, t, options);
    return std::abs(a[2] - a[0] * a[1]);
}

std::vector<ExponentialRow> compare_exponential(const SpectralMeasure& measure, const ResonancePole& pole,
                                                std::span<const double> taus, const AmplitudeOptions& options) {
    const auto a = survival_amplitudes(measure, taus, options);
    std::vector<ExponentialRow> rows(taus.size());
    const double r = std::abs(pole.residue);
    for (std::size_t k = 0; k < taus.size(); ++k) {
        auto& row = rows[k];
        row.tau = taus[k];
        row.abs_A = std::abs(a[k]);
        row.exp_pure = std::exp(pole.mu.imag() * taus[k]);
        row.exp_residue = r * row.exp_pure;
        row.deviation = std::abs(row.abs_A - row.exp_residue);
    }
    return rows;
}

}  // namespace lpres
