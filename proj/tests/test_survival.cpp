#include <doctest.h>

#include "lpres/errors.hpp"
#include "lpres/survival.hpp"

#include <cmath>
#include <numbers>

using namespace lpres;

namespace {

constexpr double pi = std::numbers::pi;
const cplx I(0.0, 1.0);

ModelParameters params(double g = 0.2) {
    ModelParameters p;
    p.omega_V = 1.0;
    p.g = g;
    return p;
}

// exact amplitude for the Lorentzian density: two second-sheet poles, no background
struct TwoPole {
    cplx m1, m2, r1, r2;
    TwoPole(double gamma, double g2) {
        const cplx disc = std::sqrt(cplx(4.0 * g2 - gamma * gamma, 0.0));
        m1 = 1.0 - 0.5 * I * gamma + 0.5 * disc;
        m2 = 1.0 - 0.5 * I * gamma - 0.5 * disc;
        r1 = (m1 - 1.0 + I * gamma) / (m1 - m2);
        r2 = (m2 - 1.0 + I * gamma) / (m2 - m1);
    }
    cplx A(double t) const { return r1 * std::exp(-I * m1 * t) + r2 * std::exp(-I * m2 * t); }
};

}  // namespace

TEST_CASE("flat band measure is the Lorentzian line") {
    const auto m = spectral_measure(params(), SpectralDensity::flat(0.2));
    CHECK(std::abs(m.total_mass - 1.0) < 1e-12);
    for (double l : {-5.0, 0.9, 1.0, 1.3, 8.0}) {
        const double oracle = (0.2 / (2 * pi)) / ((l - 1.0) * (l - 1.0) + 0.01);
        CHECK(m.weight(l) == doctest::Approx(oracle).epsilon(1e-13));
    }
}

TEST_CASE("total spectral mass is one") {
    for (const auto& d : {SpectralDensity::lorentzian(1.0, 0.1, 0.04), SpectralDensity::gaussian(1.0, 1.0, 0.04),
                          SpectralDensity::gaussian(0.5, 0.3, 0.02)}) {
        const auto m = spectral_measure(params(), d);
        INFO(to_string(d.variant()));
        CHECK(std::abs(m.total_mass - 1.0) < 1e-6);
    }
}

TEST_CASE("decoupled level has no continuum measure") {
    CHECK_THROWS_AS(spectral_measure(params(0.0), SpectralDensity::flat(0.2)), NumericalError);
}

TEST_CASE("survival amplitude: flat band") {
    const auto m = spectral_measure(params(), SpectralDensity::flat(0.2));
    CHECK(std::abs(survival_amplitude(m, 0.0) - 1.0) < 1e-8);
    const cplx a5 = survival_amplitude(m, 5.0);
    CHECK(std::abs(std::abs(a5) - std::exp(-0.5)) < 1e-6);
    CHECK(std::abs(a5 - std::exp(-I * cplx(1.0, -0.1) * 5.0)) < 1e-6);
}

TEST_CASE("survival amplitude: Lorentzian against the two-pole oracle") {
    const TwoPole o(0.1, 0.04);
    const auto m = spectral_measure(params(), SpectralDensity::lorentzian(1.0, 0.1, 0.04));
    const double taus[] = {0.0, 1.0, 5.0, 10.0, 30.0};
    const auto A = survival_amplitudes(m, taus);
    for (std::size_t i = 0; i < A.size(); ++i) CHECK(std::abs(A[i] - o.A(taus[i])) < 1e-7);
}

TEST_CASE("survival amplitude: Gaussian against a direct fine-grid oracle") {
    // Hilbert transform through the Dawson function D, D' = 1 - 2 x D, integrated by RK4:
    // PV \int rho/(s - l) dl = g2 sqrt(2) D((s - l0)/(sqrt(2) w))/w
    const double g2 = 0.04, l0 = 1.0, w = 1.0, lo = -11.0, hi = 13.0, h = 5e-4;
    const int n = static_cast<int>(std::lround((hi - lo) / h));
    const double dx = h / (std::sqrt(2.0) * w);
    auto rhs = [](double x, double D) { return 1.0 - 2.0 * x * D; };
    std::vector<double> D(static_cast<std::size_t>(n + 1));
    const int i0 = static_cast<int>(std::lround((l0 - lo) / h));
    D[static_cast<std::size_t>(i0)] = 0.0;
    for (int dir : {1, -1}) {
        double Dv = 0.0;
        for (int i = i0; dir > 0 ? i < n : i > 0; i += dir) {
            const double x = (lo + i * h - l0) / (std::sqrt(2.0) * w), s = dir * dx;
            const double k1 = rhs(x, Dv), k2 = rhs(x + s / 2, Dv + s / 2 * k1), k3 = rhs(x + s / 2, Dv + s / 2 * k2),
                         k4 = rhs(x + s, Dv + s * k3);
            Dv += s / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
            D[static_cast<std::size_t>(i + dir)] = Dv;
        }
    }
    const double tau = 5.0;
    cplx oracle = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double l = lo + i * h;
        const double rho = g2 / (w * std::sqrt(2 * pi)) * std::exp(-0.5 * (l - l0) * (l - l0) / (w * w));
        const double pv = g2 * std::sqrt(2.0) * D[static_cast<std::size_t>(i)] / w;
        const cplx hp(l - 1.0 - pv, pi * rho);
        oracle += (i == 0 || i == n ? 0.5 : 1.0) * rho / std::norm(hp) * std::exp(-I * l * tau);
    }
    oracle *= h;
    const auto m = spectral_measure(params(), SpectralDensity::gaussian(l0, w, g2));
    CHECK(std::abs(survival_amplitude(m, tau) - oracle) < 1e-5);
}

TEST_CASE("semigroup defect") {
    const auto fl = spectral_measure(params(), SpectralDensity::flat(0.2));
    for (double t1 : {0.5, 2.0, 5.0})
        for (double t2 : {1.0, 3.0}) CHECK(semigroup_defect(fl, t1, t2) < 1e-8);
    const auto lm = spectral_measure(params(), SpectralDensity::lorentzian(1.0, 0.1, 0.04));
    const TwoPole o(0.1, 0.04);
    const double d = semigroup_defect(lm, 5.0, 5.0);
    CHECK(d > 1e-3);
    CHECK(std::abs(d - std::abs(o.A(10.0) - o.A(5.0) * o.A(5.0))) < 1e-6);
    CHECK(semigroup_defect(lm, 0.0, 3.0) == 0.0);
}

TEST_CASE("comparison with the exponential law") {
    const auto fl = spectral_measure(params(), SpectralDensity::flat(0.2));
    ResonancePole p;
    p.mu = cplx(1.0, -0.1);
    p.residue = 1.0;
    std::vector<double> taus;
    for (int i = 0; i <= 40; ++i) taus.push_back(0.5 * i);
    for (const auto& row : compare_exponential(fl, p, taus)) CHECK(row.deviation < 1e-6);

    const TwoPole o(0.1, 0.04);
    const auto lm = spectral_measure(params(), SpectralDensity::lorentzian(1.0, 0.1, 0.04));
    ResonancePole q;
    q.mu = o.m1;
    q.residue = o.r1;
    const double t0[] = {0.0};
    const auto first = compare_exponential(lm, q, t0);
    CHECK(first[0].abs_A == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(first[0].exp_pure == 1.0);
    CHECK(first[0].deviation == doctest::Approx(std::abs(1.0 - std::abs(o.r1))).epsilon(1e-7));

    // tau >= 20/|Im mu|: the partner pole keeps |A| far from the single exponential
    const double late[] = {400.0, 410.0, 420.0};
    AmplitudeOptions tight;
    tight.refine_tol = 1e-13;
    for (const auto& row : compare_exponential(lm, q, late, tight)) {
        CHECK(std::abs(row.abs_A - std::abs(o.A(row.tau))) < 1e-10);
        CHECK(row.deviation > 0.1 * row.exp_residue);
    }
}
