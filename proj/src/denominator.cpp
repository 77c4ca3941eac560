#include "lpres/denominator.hpp"

#include "dispersion.hpp"
#include "lpres/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <tbb/parallel_for.h>

namespace lpres {

namespace {

constexpr double pi = std::numbers::pi;
const cplx I(0.0, 1.0);

bool decoupled(const ModelParameters& p) { return p.g == 0.0; }

void require_continuation(const SpectralDensity& d) {
    if (!d.continuation_available()) {
        throw ValidationError("continuation unavailable for " + to_string(d.variant()) + " density");
    }
}

detail::ComplexQuad numeric_remainder(const SpectralDensity& d, cplx z) {
    const double cinf = d.asymptotic_constant();
    return detail::cauchy_numeric([&](double l) { return d.value(l) - cinf; }, z, d.center(), d.scale());
}

// Cauchy transform on the physical sheet, either half-plane
cplx cauchy_any(const SpectralDensity& d, cplx z, DispersionPath path, double* error) {
    if (error) *error = 0.0;
    const double side = z.imag() > 0.0 ? 1.0 : -1.0;
    if (d.is_table()) return detail::cauchy_table(d.table_lambdas(), d.table_values(), z);
    if (path == DispersionPath::automatic) {
        if (d.variant() == DensityVariant::flat) return -side * I * 0.5 * d.gamma_total();
        if (d.variant() == DensityVariant::lorentzian) {
            return d.g2() / (z - d.lambda0() + side * I * d.width());
        }
    }
    // \int c/(z - l) dl = -i pi c sign(Im z) for the constant part
    auto q = numeric_remainder(d, z);
    if (error) *error = q.error;
    return q.value - side * I * pi * d.asymptotic_constant();
}

// d/dz of the physical-sheet Cauchy transform
cplx cauchy_dz(const SpectralDensity& d, cplx z) {
    const double side = z.imag() > 0.0 ? 1.0 : -1.0;
    switch (d.variant()) {
        case DensityVariant::flat: return 0.0;
        case DensityVariant::lorentzian: {
            const cplx w = z - d.lambda0() + side * I * d.width();
            return -d.g2() / (w * w);
        }
        case DensityVariant::gaussian:
            return detail::cauchy_numeric([&](double l) { return d.derivative(l); }, z, d.center(), d.scale()).value;
        default: return detail::cauchy_table_dz(d.table_lambdas(), d.table_values(), z);
    }
}

double pv_part(const SpectralDensity& d, double sigma, DispersionPath path) {
    if (d.is_table()) {
        const auto& lam = d.table_lambdas();
        const auto& val = d.table_values();
        if (sigma < lam.front() || sigma > lam.back()) throw ValidationError("sigma outside table range");
        if ((sigma == lam.front() && val.front() != 0.0) || (sigma == lam.back() && val.back() != 0.0)) {
            throw NumericalError("principal value diverges at a table edge with nonzero density");
        }
        return detail::pv_table(lam, val, sigma);
    }
    if (path == DispersionPath::automatic) {
        if (d.variant() == DensityVariant::flat) return 0.0;
        if (d.variant() == DensityVariant::lorentzian) {
            const double x = sigma - d.lambda0();
            return d.g2() * x / (x * x + d.width() * d.width());
        }
    }
    const double cinf = d.asymptotic_constant();
    return detail::pv_numeric([&](double l) { return d.value(l) - cinf; }, sigma, d.center(), d.scale()).value;
}

// boundary value from below of d/dz C, for derivatives on the real axis
cplx cauchy_dz_from_below(const SpectralDensity& d, double sigma) {
    switch (d.variant()) {
        case DensityVariant::flat: return 0.0;
        case DensityVariant::lorentzian: return cauchy_dz(d, cplx(sigma, -0.0));
        case DensityVariant::gaussian: {
            const double pv =
                detail::pv_numeric([&](double l) { return d.derivative(l); }, sigma, d.center(), d.scale()).value;
            return pv + I * pi * d.derivative(sigma);
        }
        default: break;
    }
    throw ValidationError("derivative on the real axis needs an analytic continuation");
}

cplx muller_step(cplx x0, cplx x1, cplx x2, cplx f0, cplx f1, cplx f2) {
    const cplx q = (x2 - x1) / (x1 - x0);
    const cplx A = q * f2 - q * (1.0 + q) * f1 + q * q * f0;
    const cplx B = (2.0 * q + 1.0) * f2 - (1.0 + q) * (1.0 + q) * f1 + q * q * f0;
    const cplx C = (1.0 + q) * f2;
    const cplx disc = std::sqrt(B * B - 4.0 * A * C);
    const cplx den = std::abs(B + disc) >= std::abs(B - disc) ? B + disc : B - disc;
    if (den == 0.0) return x2 + 1e-3 * (1.0 + std::abs(x2));
    return x2 - (x2 - x1) * 2.0 * C / den;
}

}  // namespace

cplx cauchy_transform(const SpectralDensity& density, cplx z, DispersionPath path, double* error) {
    if (z.imag() == 0.0) throw ValidationError("Cauchy transform evaluated on the real axis");
    return cauchy_any(density, z, path, error);
}

cplx h_upper(const ModelParameters& params, const SpectralDensity& density, cplx z, DispersionPath path) {
    if (!(z.imag() > 0.0)) throw ValidationError("h_upper needs Im z > 0");
    if (decoupled(params)) return z - params.omega_V;
    return z - params.omega_V - cauchy_any(density, z, path, nullptr);
}

BoundaryValue h_boundary(const ModelParameters& params, const SpectralDensity& density, double sigma,
                         DispersionPath path) {
    BoundaryValue b;
    b.sigma = sigma;
    if (decoupled(params)) {
        b.h_plus = sigma - params.omega_V;
    } else {
        b.rho = density.value(sigma);
        b.pv_part = pv_part(density, sigma, path);
        b.h_plus = cplx(sigma - params.omega_V - b.pv_part, pi * b.rho);
    }
    b.h_minus = std::conj(b.h_plus);
    return b;
}

double plemelj_jump(const ModelParameters& params, const SpectralDensity& density, double sigma, double eps) {
    if (decoupled(params)) return 0.0;
    const cplx below = cauchy_any(density, cplx(sigma, -eps), DispersionPath::automatic, nullptr);
    const cplx above = cauchy_any(density, cplx(sigma, eps), DispersionPath::automatic, nullptr);
    return ((below - above) / (2.0 * pi * I)).real();
}

double plemelj_residual(const ModelParameters& params, const SpectralDensity& density, double sigma,
                        std::span<const double> eps) {
    if (eps.empty()) throw ValidationError("empty eps sequence");
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0) || (i > 0 && !(eps[i] < eps[i - 1]))) {
            throw ValidationError("eps sequence must be positive and decreasing");
        }
    }
    if (decoupled(params)) return 0.0;
    // Neville tableau evaluated at eps = 0
    std::vector<double> p(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) p[i] = plemelj_jump(params, density, sigma, eps[i]);
    for (std::size_t m = 1; m < eps.size(); ++m) {
        for (std::size_t i = 0; i + m < eps.size(); ++i) {
            p[i] = (eps[i + m] * p[i] - eps[i] * p[i + 1]) / (eps[i + m] - eps[i]);
        }
    }
    return std::abs(p[0] - density.value(sigma));
}

cplx h_second_sheet(const ModelParameters& params, const SpectralDensity& density, cplx z) {
    if (z.imag() > 0.0) throw ValidationError("h_second_sheet needs Im z <= 0");
    if (decoupled(params)) return z - params.omega_V;
    require_continuation(density);
    if (z.imag() == 0.0) return h_boundary(params, density, z.real()).h_plus;
    return z - params.omega_V - cauchy_any(density, z, DispersionPath::automatic, nullptr) +
           2.0 * pi * I * density.continued(z);
}

cplx h_continued(const ModelParameters& params, const SpectralDensity& density, cplx z) {
    if (z.imag() > 0.0) return h_upper(params, density, z);
    return h_second_sheet(params, density, z);
}

cplx h_derivative(const ModelParameters& params, const SpectralDensity& density, cplx z) {
    if (decoupled(params)) return 1.0;
    if (z.imag() > 0.0) return 1.0 - cauchy_dz(density, z);
    require_continuation(density);
    const cplx cdz = z.imag() == 0.0 ? cauchy_dz_from_below(density, z.real()) : cauchy_dz(density, z);
    return 1.0 - cdz + 2.0 * pi * I * density.continued_derivative(z);
}

ResonancePole find_pole(const ModelParameters& params, const SpectralDensity& density, cplx seed,
                        const PoleOptions& options) {
    if (seed.imag() > 0.0) throw ValidationError("pole seed must satisfy Im seed <= 0");
    ResonancePole pole;
    if (decoupled(params)) {
        pole.mu = params.omega_V;
        pole.residue = 1.0;
        pole.sheet = Sheet::physical;
        return pole;
    }
    require_continuation(density);

    auto h = [&](cplx z) { return h_continued(params, density, z); };
    cplx z = seed;
    cplx f = h(z);
    double best = std::abs(f);
    int stagnant = 0;
    bool use_muller = false;
    cplx m0, m1, fm0, fm1;
    bool converged = false;
    double step_len = 0.0;
    int it = 0;
    for (it = 1; it <= options.max_iterations; ++it) {
        cplx step;
        if (!use_muller) {
            const cplx d = h_derivative(params, density, z);
            step = d == 0.0 ? cplx(1e-3 * (1.0 + std::abs(z))) : -f / d;
        } else {
            step = muller_step(m0, m1, z, fm0, fm1, f) - z;
        }
        step_len = std::abs(step);
        if (std::abs(f) < options.tol_h && step_len < options.tol_step * (1.0 + std::abs(z))) {
            converged = true;
            break;
        }
        if (use_muller) {
            m0 = m1;
            fm0 = fm1;
            m1 = z;
            fm1 = f;
        }
        z += step;
        f = h(z);
        if (!std::isfinite(f.real()) || !std::isfinite(f.imag())) break;
        if (std::abs(f) < best) {
            best = std::abs(f);
            stagnant = 0;
        } else if (!use_muller && ++stagnant >= options.stagnation_limit) {
            use_muller = true;
            const double hh = 1e-3 * (1.0 + std::abs(z));
            m0 = z - hh;
            m1 = z + hh;
            fm0 = h(m0);
            fm1 = h(m1);
        }
    }
    if (!converged) {
        throw NumericalError("pole search did not converge within " + std::to_string(options.max_iterations) +
                             " iterations (|h| = " + std::to_string(std::abs(f)) + ", tolerance " +
                             std::to_string(options.tol_h) + ")");
    }
    if (z.imag() > options.tol_step * (1.0 + std::abs(z))) {
        throw NumericalError("h has no upper-half-plane zeros; search converged above the axis");
    }
    pole.mu = cplx(z.real(), std::min(z.imag(), 0.0));
    pole.residue = 1.0 / h_derivative(params, density, pole.mu);
    pole.iterations = it;
    pole.final_step = step_len;
    pole.final_abs_h = std::abs(f);
    pole.sheet = pole.mu.imag() < 0.0 ? Sheet::second : Sheet::physical;
    return pole;
}

std::vector<ResonancePole> find_all_poles(const ModelParameters& params, const SpectralDensity& density,
                                          const Rectangle& rect, int n_re, int n_im, const PoleOptions& options,
                                          double dedup_radius) {
    if (rect.im_max > 0.0 || rect.im_min > rect.im_max || rect.re_min > rect.re_max) {
        throw ValidationError("pole rectangle must lie in the closed lower half-plane");
    }
    if (n_re < 1 || n_im < 1) throw ValidationError("seed grid needs at least one point per axis");
    if (decoupled(params)) {
        ResonancePole p;
        p.mu = params.omega_V;
        p.residue = 1.0;
        p.sheet = Sheet::physical;
        return {p};
    }
    require_continuation(density);

    auto lin = [](double a, double b, int n, int i) { return n == 1 ? 0.5 * (a + b) : a + (b - a) * i / (n - 1); };
    const int total = n_re * n_im;
    std::vector<std::optional<ResonancePole>> found(static_cast<std::size_t>(total));
    tbb::parallel_for(0, total, [&](int idx) {
        const cplx seed(lin(rect.re_min, rect.re_max, n_re, idx % n_re), lin(rect.im_min, rect.im_max, n_im, idx / n_re));
        try {
            found[static_cast<std::size_t>(idx)] = find_pole(params, density, seed, options);
        } catch (const NumericalError&) {
        }
    });

    std::vector<ResonancePole> out;
    const double slack = 1e-10;
    for (const auto& f : found) {
        if (!f) continue;
        const cplx mu = f->mu;
        if (mu.real() < rect.re_min - slack || mu.real() > rect.re_max + slack || mu.imag() < rect.im_min - slack ||
            mu.imag() > rect.im_max + slack) {
            continue;
        }
        const bool dup = std::any_of(out.begin(), out.end(), [&](const ResonancePole& p) {
            return std::abs(p.mu - mu) < dedup_radius;
        });
        if (!dup) out.push_back(*f);
    }
    std::sort(out.begin(), out.end(), [](const ResonancePole& a, const ResonancePole& b) {
        return a.mu.real() != b.mu.real() ? a.mu.real() < b.mu.real() : a.mu.imag() < b.mu.imag();
    });
    return out;
}

cplx weak_coupling_estimate(const ModelParameters& params, const SpectralDensity& density) {
    if (decoupled(params)) return params.omega_V;
    if (density.variant() == DensityVariant::flat) return cplx(params.omega_V, -0.5 * density.gamma_total());
    const BoundaryValue b = h_boundary(params, density, params.omega_V);
    return cplx(params.omega_V + b.pv_part, -pi * b.rho);
}

}  // namespace lpres
