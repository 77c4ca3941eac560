#include "lpres/foliation.hpp"

#include "lpres/errors.hpp"

#include <cmath>
#include <fftw3.h>
#include <mutex>
#include <numbers>
#include <random>
#include <tbb/parallel_for.h>

namespace lpres {

namespace {

constexpr double pi = std::numbers::pi;
const cplx I(0.0, 1.0);

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// in-place DFT of every column; sign follows FFTW (FFTW_FORWARD = -1)
void dft_columns(Eigen::MatrixXcd& M, int sign) {
    const int n = static_cast<int>(M.rows());
    const int howmany = static_cast<int>(M.cols());
    auto* data = reinterpret_cast<fftw_complex*>(M.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_many_dft(1, &n, howmany, data, nullptr, 1, n, data, nullptr, 1, n, sign, FFTW_ESTIMATE);
    }
    if (!plan) throw NumericalError("FFTW plan creation failed");
    fftw_execute(plan);
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
}

double alt(std::size_t k) { return (k & 1U) ? -1.0 : 1.0; }

Representation partner(Representation r) {
    switch (r) {
        case Representation::out_spectral: return Representation::out_translation;
        case Representation::out_translation: return Representation::out_spectral;
        case Representation::in_spectral: return Representation::in_translation;
        case Representation::in_translation: return Representation::in_spectral;
    }
    return r;
}

bool is_out(Representation r) { return r == Representation::out_spectral || r == Representation::out_translation; }

cplx periodic_blaschke(cplx mu, double sigma, double ds) {
    return std::sin(0.5 * (sigma - std::conj(mu)) * ds) / std::sin(0.5 * (sigma - mu) * ds);
}

// F -> S F (adjoint = false) or S^dagger F, row by row with S = 1 - P + s P
Eigen::MatrixXcd apply_s(const Eigen::MatrixXcd& F, const GridScattering& sc, bool adjoint) {
    const Eigen::MatrixXcd FP = F * sc.P.transpose();
    Eigen::MatrixXcd out = F;
    for (Eigen::Index j = 0; j < F.rows(); ++j) {
        const cplx s = adjoint ? std::conj(sc.s(j)) : sc.s(j);
        out.row(j) += (s - 1.0) * FP.row(j);
    }
    return out;
}

FoliatedState to_out_spectral(const FoliatedState& st) {
    if (st.rep == Representation::out_spectral) return st;
    if (st.rep == Representation::out_translation) return to_spectral(st);
    throw ValidationError("representation mismatch: expected an outgoing representation, got " + to_string(st.rep));
}

FoliatedState restore(const FoliatedState& st, Representation target) {
    return st.rep == target ? st : (st.spectral() ? to_translation(st) : to_spectral(st));
}

}  // namespace

FoliationGrid FoliationGrid::make(std::size_t N, double Omega) {
    if (N < 4 || (N & (N - 1)) != 0) throw ValidationError("N must be a power of two");
    if (!(Omega > 0.0) || !std::isfinite(Omega)) throw ValidationError("Omega must be positive");
    return FoliationGrid{N, Omega};
}

double FoliationGrid::ds() const { return pi / Omega; }

double FoliationGrid::s(std::size_t k) const {
    return (static_cast<double>(k) - static_cast<double>(N / 2)) * ds();
}

std::string to_string(Representation r) {
    switch (r) {
        case Representation::out_spectral: return "out_spectral";
        case Representation::out_translation: return "out_translation";
        case Representation::in_spectral: return "in_spectral";
        case Representation::in_translation: return "in_translation";
    }
    return "unknown";
}

double FoliatedState::norm() const {
    const double w = spectral() ? grid.dsigma() : grid.ds();
    return std::sqrt(w * samples.squaredNorm());
}

FoliatedState to_translation(const FoliatedState& state) {
    if (!state.spectral()) throw ValidationError("to_translation needs a spectral representation");
    FoliatedState out = state;
    out.rep = partner(state.rep);
    auto& M = out.samples;
    for (Eigen::Index j = 0; j < M.rows(); ++j) M.row(j) *= alt(static_cast<std::size_t>(j));
    dft_columns(M, FFTW_BACKWARD);
    const double c = state.grid.dsigma() / std::sqrt(2.0 * pi);
    for (Eigen::Index k = 0; k < M.rows(); ++k) M.row(k) *= c * alt(static_cast<std::size_t>(k));
    return out;
}

FoliatedState to_spectral(const FoliatedState& state) {
    if (state.spectral()) throw ValidationError("to_spectral needs a translation representation");
    FoliatedState out = state;
    out.rep = partner(state.rep);
    auto& M = out.samples;
    for (Eigen::Index k = 0; k < M.rows(); ++k) M.row(k) *= alt(static_cast<std::size_t>(k));
    dft_columns(M, FFTW_FORWARD);
    const double c = state.grid.ds() / std::sqrt(2.0 * pi);
    for (Eigen::Index j = 0; j < M.rows(); ++j) M.row(j) *= c * alt(static_cast<std::size_t>(j));
    return out;
}

FoliatedState evolve_free(const FoliatedState& state, double tau) {
    if (!state.spectral()) throw ValidationError("evolve_free needs a spectral representation");
    FoliatedState out = state;
    if (tau == 0.0) return out;
    for (Eigen::Index j = 0; j < out.samples.rows(); ++j) {
        out.samples.row(j) *= std::polar(1.0, -state.grid.sigma(static_cast<std::size_t>(j)) * tau);
    }
    return out;
}

GridScattering grid_scattering(const ModelParameters& params, const SpectralDensity& density,
                               const AuxiliaryVector& aux, const FoliationGrid& grid,
                               const std::vector<ResonancePole>& poles) {
    GridScattering sc;
    sc.grid = grid;
    sc.P = projector(aux, 0.0);
    for (const auto& p : poles) {
        if (p.mu.imag() < 0.0) sc.blaschke_zeros.push_back(p.mu);
    }
    const std::size_t N = grid.N;
    sc.s.resize(static_cast<Eigen::Index>(N));
    std::vector<double> dev(N, 0.0);
    const double ds = grid.ds();
    tbb::parallel_for(std::size_t{0}, N, [&](std::size_t j) {
        const double sigma = grid.sigma(j);
        const cplx s = s_scalar(params, density, sigma);
        dev[j] = std::abs(std::abs(s) - 1.0);
        cplx v = s;
        for (cplx mu : sc.blaschke_zeros) v *= periodic_blaschke(mu, sigma, ds) / blaschke_factor(mu, cplx(sigma, 0.0));
        sc.s(static_cast<Eigen::Index>(j)) = v / std::abs(v);
    });
    for (double d : dev) sc.max_unitarity_deviation = std::max(sc.max_unitarity_deviation, d);
    if (sc.max_unitarity_deviation > 1e-6) {
        throw NumericalError("S-matrix not unimodular on the grid (max deviation " +
                             std::to_string(sc.max_unitarity_deviation) + ", tolerance 1e-6)");
    }

    std::vector<double> sig(N);
    for (std::size_t j = 0; j < N; ++j) sig[j] = grid.sigma(j);
    if (params.g != 0.0) {
        const InnerFactorization f = factorize(params, density, poles, sig);
        sc.classification = f.classification;
        if (f.classification == InnerClass::not_inner) {
            sc.warnings.push_back("S-matrix is not inner: D+ and D- need not be orthogonal, the projections may not "
                                  "commute and the semigroup law is not guaranteed");
        } else if (f.classification == InnerClass::inner_with_singular_factor) {
            sc.warnings.push_back("residual phase is sampled, so the grid S-matrix is inner only approximately");
        }
        if (f.real_axis_only) sc.warnings.push_back("classification from real-axis data only");
    }
    return sc;
}

FoliatedState project_out_Dplus(const FoliatedState& state) {
    const Representation target = state.rep;
    FoliatedState t = state.spectral() ? to_translation(to_out_spectral(state)) : state;
    if (!is_out(t.rep)) throw ValidationError("D+ projection needs an outgoing representation");
    const std::size_t N = t.grid.N;
    for (std::size_t k = N / 2 + 1; k < N; ++k) t.samples.row(static_cast<Eigen::Index>(k)).setZero();
    return restore(t, target);
}

FoliatedState project_out_Dminus(const FoliatedState& state, const GridScattering& scattering) {
    const Representation target = state.rep;
    FoliatedState F = to_out_spectral(state);
    if (F.grid.N != scattering.grid.N || F.grid.Omega != scattering.grid.Omega) {
        throw ValidationError("state and scattering grids differ");
    }
    FoliatedState in = F;
    in.rep = Representation::in_spectral;
    in.samples = apply_s(F.samples, scattering, true);
    FoliatedState t = to_translation(in);
    for (std::size_t k = 0; k <= F.grid.N / 2; ++k) t.samples.row(static_cast<Eigen::Index>(k)).setZero();
    FoliatedState back = to_spectral(t);
    F.samples = apply_s(back.samples, scattering, false);
    return restore(F, target);
}

FoliatedState project_K(const FoliatedState& state, const GridScattering& scattering) {
    return project_out_Dplus(project_out_Dminus(state, scattering));
}

FoliatedState semigroup_Z(const FoliatedState& state, double tau, const GridScattering& scattering) {
    if (!(tau >= 0.0)) throw ValidationError("semigroup_Z needs tau >= 0");
    const Representation target = state.rep;
    FoliatedState f = to_out_spectral(project_K(state, scattering));
    f = evolve_free(f, tau);
    f = to_out_spectral(project_K(f, scattering));
    return restore(f, target);
}

FoliatedState resonant_state(const ResonancePole& pole, const AuxiliaryVector& aux, const FoliationGrid& grid,
                             ResonantSampling sampling, bool normalize) {
    const cplx mu = pole.mu;
    if (!(mu.imag() < 0.0)) throw ValidationError("resonant state needs Im mu < 0 (zero-width pole rejected)");
    const Eigen::VectorXcd u = aux.components / aux.components.norm();
    FoliatedState st;
    st.grid = grid;
    st.rep = Representation::out_spectral;
    st.samples.resize(static_cast<Eigen::Index>(grid.N), u.size());
    const double ds = grid.ds();
    for (std::size_t j = 0; j < grid.N; ++j) {
        const double sigma = grid.sigma(j);
        const cplx kernel = sampling == ResonantSampling::grid_periodic
                                ? -I * ds / (1.0 - std::exp(I * (sigma - mu) * ds))
                                : 1.0 / (sigma - mu);
        st.samples.row(static_cast<Eigen::Index>(j)) = (2.0 * I * mu.imag() * kernel) * u.transpose();
    }
    if (normalize) st.samples /= st.norm();
    return st;
}

double dplus_leakage(const FoliatedState& state, double tau) {
    if (state.rep != Representation::out_translation) throw ValidationError("dplus_leakage needs out_translation");
    // tau == 0 is the identity; skipping the transform pair keeps exact zeros exact
    const FoliatedState t = tau == 0.0 ? state : to_translation(evolve_free(to_spectral(state), tau));
    const std::size_t N = t.grid.N;
    const double total = t.samples.squaredNorm();
    if (total == 0.0) return 0.0;
    return t.samples.topRows(static_cast<Eigen::Index>(N / 2 + 1)).squaredNorm() / total;
}

double check_Dplus_invariance(const FoliationGrid& grid, std::span<const double> taus, std::uint64_t seed,
                              int n_states) {
    for (double t : taus) {
        if (!(t >= 0.0)) throw ValidationError("check_Dplus_invariance needs tau >= 0");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> centre(20.0, 40.0), width(1.0, 2.0), amp(-1.0, 1.0);
    double worst = 0.0;
    for (int n = 0; n < n_states; ++n) {
        FoliatedState st;
        st.grid = grid;
        st.rep = Representation::out_translation;
        st.samples = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(grid.N), 1);
        for (int b = 0; b < 3; ++b) {
            const double c = centre(rng), w = width(rng);
            const cplx a(amp(rng), amp(rng));
            for (std::size_t k = grid.N / 2 + 1; k < grid.N; ++k) {
                const double x = (grid.s(k) - c) / w;
                st.samples(static_cast<Eigen::Index>(k), 0) += a * std::exp(-0.5 * x * x);
            }
        }
        for (double t : taus) worst = std::max(worst, dplus_leakage(st, t));
    }
    return worst;
}

double expectation(const FoliatedState& state, const std::function<Eigen::MatrixXcd(double)>& A) {
    if (state.spectral()) throw ValidationError("expectation needs a translation representation");
    double sum = 0.0;
    const double ds = state.grid.ds();
    for (std::size_t k = 0; k < state.grid.N; ++k) {
        const Eigen::MatrixXcd a = A(state.grid.s(k));
        if ((a - a.adjoint()).norm() > 1e-12 * std::max(1.0, a.norm())) {
            throw ValidationError("operator family is not self-adjoint at s = " + std::to_string(state.grid.s(k)));
        }
        const Eigen::VectorXcd psi = state.samples.row(static_cast<Eigen::Index>(k)).transpose();
        sum += (psi.adjoint() * a * psi)(0, 0).real();
    }
    return ds * sum;
}

}  // namespace lpres
