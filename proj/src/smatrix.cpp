#include "lpres/smatrix.hpp"

#include "lpres/errors.hpp"

#include <cmath>
#include <numbers>

namespace lpres {

namespace {

constexpr double pi = std::numbers::pi;
const cplx I(0.0, 1.0);

double arg_step(cplx from, cplx to) { return std::arg(to / from); }

// Phase change of f between a and b, bisecting until every step is below pi/2.
template <class F>
double refined_phase(const F& f, double a, cplx fa, double b, cplx fb, int depth) {
    const double d = arg_step(fa, fb);
    if (std::abs(d) < 0.5 * pi) return d;
    if (depth > 48) throw NumericalError("phase step exceeds pi/2 after maximal refinement");
    const double m = 0.5 * (a + b);
    const cplx fm = f(m);
    return refined_phase(f, a, fa, m, fm, depth + 1) + refined_phase(f, m, fm, b, fb, depth + 1);
}

template <class F>
std::vector<double> unwrap_along(const F& f, const std::vector<double>& grid) {
    std::vector<double> out(grid.size(), 0.0);
    if (grid.empty()) return out;
    cplx prev = f(grid[0]);
    out[0] = std::arg(prev);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const cplx cur = f(grid[i]);
        out[i] = out[i - 1] + refined_phase(f, grid[i - 1], prev, grid[i], cur, 0);
        prev = cur;
    }
    return out;
}

}  // namespace

AuxiliaryVector AuxiliaryVector::unit(Eigen::VectorXcd u) {
    if (u.size() == 0 || u.norm() == 0.0) throw ValidationError("auxiliary vector must be nonzero");
    AuxiliaryVector a;
    a.components = u / u.norm();
    return a;
}

Eigen::VectorXcd AuxiliaryVector::at(double sigma) const {
    if (per_component_profiles) {
        const auto& g = *per_component_profiles;
        if (g.size() != static_cast<std::size_t>(components.size())) {
            throw ValidationError("need one profile per auxiliary component");
        }
        Eigen::VectorXcd n(components.size());
        for (Eigen::Index a = 0; a < components.size(); ++a) n(a) = g[static_cast<std::size_t>(a)](sigma) * components(a);
        return n;
    }
    return profile(sigma) * components;
}

std::string to_string(InnerClass c) {
    switch (c) {
        case InnerClass::inner_rational: return "inner_rational";
        case InnerClass::inner_with_singular_factor: return "inner_with_singular_factor";
        case InnerClass::not_inner: return "not_inner";
    }
    return "unknown";
}

cplx blaschke_factor(cplx mu, cplx z) { return (z - std::conj(mu)) / (z - mu); }

cplx s_scalar(const ModelParameters& params, const SpectralDensity& density, double sigma) {
    if (params.g == 0.0) return 1.0;
    const BoundaryValue b = h_boundary(params, density, sigma);
    if (std::abs(b.h_plus) == 0.0) {
        throw NumericalError("h_plus vanishes at sigma = " + std::to_string(sigma) + " (bound state or threshold)");
    }
    return 1.0 - 2.0 * pi * I * b.rho / b.h_plus;
}

cplx s_continued_upper(const ModelParameters& params, const SpectralDensity& density, cplx z) {
    if (!(z.imag() > 0.0)) throw ValidationError("s_continued_upper needs Im z > 0");
    if (params.g == 0.0) return 1.0;
    if (!density.continuation_available()) {
        throw ValidationError("continuation unavailable for " + to_string(density.variant()) + " density");
    }
    const cplx hu = h_upper(params, density, z);
    return (hu - 2.0 * pi * I * density.continued(z)) / hu;
}

Eigen::MatrixXcd projector(const AuxiliaryVector& aux, double sigma) {
    const Eigen::VectorXcd n = aux.at(sigma);
    const double nn = n.squaredNorm();
    if (!(nn > 0.0)) throw ValidationError("auxiliary vector vanishes at sigma = " + std::to_string(sigma));
    return n * n.adjoint() / nn;
}

Eigen::MatrixXcd s_operator(const ModelParameters& params, const SpectralDensity& density,
                            const AuxiliaryVector& aux, double sigma) {
    const Eigen::MatrixXcd P = projector(aux, sigma);
    const auto d = P.rows();
    return Eigen::MatrixXcd::Identity(d, d) - P + s_scalar(params, density, sigma) * P;
}

Eigen::MatrixXcd t_matrix(const ModelParameters& params, const SpectralDensity& density, const AuxiliaryVector& aux,
                          double sigma) {
    const Eigen::MatrixXcd P = projector(aux, sigma);
    if (params.g == 0.0) return Eigen::MatrixXcd::Zero(P.rows(), P.cols());
    const BoundaryValue b = h_boundary(params, density, sigma);
    if (std::abs(b.h_plus) == 0.0) throw NumericalError("h_plus vanishes (bound state or threshold)");
    return (b.rho / b.h_plus) * P;
}

Eigen::MatrixXcd t_matrix_minus(const ModelParameters& params, const SpectralDensity& density,
                                const AuxiliaryVector& aux, double sigma) {
    const Eigen::MatrixXcd P = projector(aux, sigma);
    if (params.g == 0.0) return Eigen::MatrixXcd::Zero(P.rows(), P.cols());
    const BoundaryValue b = h_boundary(params, density, sigma);
    if (std::abs(b.h_minus) == 0.0) throw NumericalError("h_minus vanishes (bound state or threshold)");
    return (b.rho / b.h_minus) * P;
}

std::vector<double> unwrapped_phase(const ModelParameters& params, const SpectralDensity& density,
                                    const std::vector<double>& grid) {
    return unwrap_along([&](double s) { return s_scalar(params, density, s); }, grid);
}

int winding_number(const ModelParameters& params, const SpectralDensity& density, double Omega, std::size_t N) {
    if (N < 1024) throw ValidationError("winding_number needs N >= 1024");
    if (!(Omega > 0.0)) throw ValidationError("winding_number needs Omega > 0");
    std::vector<double> grid(N);
    for (std::size_t i = 0; i < N; ++i) grid[i] = -Omega + 2.0 * Omega * static_cast<double>(i) / static_cast<double>(N - 1);
    const auto phase = unwrapped_phase(params, density, grid);
    return static_cast<int>(std::lround((phase.back() - phase.front()) / (2.0 * pi)));
}

InnerFactorization factorize(const ModelParameters& params, const SpectralDensity& density,
                             const std::vector<ResonancePole>& poles, const std::vector<double>& grid) {
    InnerFactorization out;
    out.grid = grid;
    for (const auto& p : poles) {
        if (p.mu.imag() < 0.0) out.blaschke_zeros.push_back(p.mu);
    }
    auto residual = [&](double s) {
        cplx r = s_scalar(params, density, s);
        for (cplx mu : out.blaschke_zeros) r /= blaschke_factor(mu, cplx(s, 0.0));
        return r;
    };
    out.phase_samples = unwrap_along(residual, grid);
    for (double s : grid) {
        const cplx r = residual(s);
        out.max_residual_deviation = std::max(out.max_residual_deviation, std::abs(r - 1.0));
        out.max_residual_modulus_error = std::max(out.max_residual_modulus_error, std::abs(std::abs(r) - 1.0));
    }

    const bool flat_residual = out.max_residual_deviation < 1e-8;
    if (params.g != 0.0 && !density.continuation_available()) {
        out.real_axis_only = true;
    } else if (params.g != 0.0) {
        for (cplx c : density.continuation_poles_upper()) {
            // confirm the pole survives in s: the modulus blows up beside it
            const double r = 1e-4 * std::max(density.scale(), 1e-12);
            bool grows = true;
            for (double ang : {0.0, 0.5 * pi, pi, 1.5 * pi}) {
                const cplx z = c + r * std::polar(1.0, ang);
                if (z.imag() <= 0.0) continue;
                if (!(std::abs(s_continued_upper(params, density, z)) > 1.0)) grows = false;
            }
            if (grows) out.defect_factors.emplace_back(c, 1);
        }
    }

    out.trivial = out.blaschke_zeros.empty() && flat_residual;
    if (!out.defect_factors.empty()) {
        out.classification = InnerClass::not_inner;
    } else if (flat_residual) {
        out.classification = InnerClass::inner_rational;
    } else {
        out.classification = InnerClass::inner_with_singular_factor;
    }
    return out;
}

double unitarity_scan(const ModelParameters& params, const SpectralDensity& density, const std::vector<double>& grid) {
    double worst = 0.0;
    for (double s : grid) worst = std::max(worst, std::abs(std::abs(s_scalar(params, density, s)) - 1.0));
    return worst;
}

}  // namespace lpres
