#include <doctest.h>

#include "lpres/errors.hpp"
#include "lpres/foliation.hpp"

#include <cmath>
#include <numbers>
#include <random>

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

AuxiliaryVector unit2() {
    Eigen::VectorXcd u(2);
    u << 1.0, 0.0;
    return AuxiliaryVector::unit(u);
}

FoliatedState spectral_state(const FoliationGrid& g, const std::function<cplx(double)>& F, int d = 1) {
    FoliatedState st;
    st.grid = g;
    st.rep = Representation::out_spectral;
    st.samples = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(g.N), d);
    for (std::size_t j = 0; j < g.N; ++j) st.samples(static_cast<Eigen::Index>(j), 0) = F(g.sigma(j));
    return st;
}

FoliatedState translation_state(const FoliationGrid& g, const std::function<cplx(double)>& f, Representation rep,
                                int d = 1) {
    FoliatedState st;
    st.grid = g;
    st.rep = rep;
    st.samples = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(g.N), d);
    for (std::size_t k = 0; k < g.N; ++k) st.samples(static_cast<Eigen::Index>(k), 0) = f(g.s(k));
    return st;
}

FoliatedState random_state(const FoliationGrid& g, std::mt19937_64& rng, int d = 2) {
    std::normal_distribution<double> n(0.0, 1.0);
    FoliatedState st;
    st.grid = g;
    st.rep = Representation::out_spectral;
    st.samples.resize(static_cast<Eigen::Index>(g.N), d);
    for (Eigen::Index j = 0; j < st.samples.rows(); ++j)
        for (Eigen::Index a = 0; a < d; ++a) st.samples(j, a) = cplx(n(rng), n(rng));
    st.samples /= st.norm();
    return st;
}

double diff_norm(const FoliatedState& a, const FoliatedState& b) {
    FoliatedState d = a;
    d.samples -= b.samples;
    return d.norm();
}

struct FlatSetup {
    FoliationGrid grid = FoliationGrid::make(4096, 20.0);
    SpectralDensity density = SpectralDensity::flat(0.2);
    std::vector<ResonancePole> poles = find_all_poles(params(), density, Rectangle{});
    GridScattering sc = grid_scattering(params(), density, unit2(), grid, poles);
};

}  // namespace

TEST_CASE("grid construction") {
    CHECK_THROWS_AS(FoliationGrid::make(1000, 20.0), ValidationError);
    const auto g = FoliationGrid::make(1024, 20.0);
    CHECK(g.ds() == doctest::Approx(pi / 20.0));
    CHECK(g.s(512) == 0.0);
}

TEST_CASE("Gaussian is its own transform") {
    const auto g = FoliationGrid::make(4096, 20.0);
    const auto F = spectral_state(g, [](double s) { return std::exp(-0.5 * s * s); });
    const auto f = to_translation(F);
    CHECK(f.rep == Representation::out_translation);
    const auto oracle = translation_state(g, [](double s) { return std::exp(-0.5 * s * s); },
                                          Representation::out_translation);
    CHECK(diff_norm(f, oracle) < 1e-8);
    CHECK(std::abs(f.norm() - F.norm()) < 1e-10);
}

TEST_CASE("transform round trip is the identity") {
    std::mt19937_64 rng(3);
    const auto g = FoliationGrid::make(2048, 15.0);
    const auto F = random_state(g, rng);
    const auto back = to_spectral(to_translation(F));
    CHECK(diff_norm(back, F) < 1e-12);
    CHECK(std::abs(to_translation(F).norm() - 1.0) < 1e-10);
    CHECK_THROWS_AS(to_spectral(F), ValidationError);
}

TEST_CASE("free evolution is a shift") {
    const auto g = FoliationGrid::make(4096, 20.0);
    const auto F = spectral_state(g, [](double s) { return std::exp(-0.5 * s * s); });
    CHECK(diff_norm(evolve_free(F, 0.0), F) == 0.0);
    for (double tau : {0.37, 2.5, 11.0}) {
        const auto f = to_translation(evolve_free(F, tau));
        const auto oracle = translation_state(
            g, [tau](double s) { return std::exp(-0.5 * (s - tau) * (s - tau)); }, Representation::out_translation);
        CHECK(diff_norm(f, oracle) < 1e-8);
        CHECK(std::abs(evolve_free(F, tau).norm() - F.norm()) < 1e-12);
    }
}

TEST_CASE("1/(sigma - mu) is supported on s < 0") {
    const cplx mu(1.0, -0.1);
    const auto g = FoliationGrid::make(4096, 10.0);  // Omega = 100 |Im mu|
    ResonancePole pole;
    pole.mu = mu;
    const auto periodic = resonant_state(pole, unit2(), g, ResonantSampling::grid_periodic);
    CHECK(diff_norm(project_out_Dplus(periodic), periodic) < 1e-6);
    // direct sampling truncates 1/(sigma - mu) at +-Omega; the Gibbs tail leaks
    // O(|Im mu|/Omega) of the norm into s > 0 and shrinks as Omega grows
    auto leak = [&](double Omega) {
        const auto gg = FoliationGrid::make(4096, Omega);
        const auto st = resonant_state(pole, unit2(), gg, ResonantSampling::direct);
        return diff_norm(project_out_Dplus(st), st);
    };
    const double l10 = leak(10.0), l40 = leak(40.0);
    CHECK(l40 < l10);
    CHECK(l10 < 0.1);
}

TEST_CASE("D+ projection") {
    const auto g = FoliationGrid::make(2048, 20.0);
    const auto left = translation_state(
        g, [](double s) { return s < -1.0 ? std::exp(-0.5 * (s + 20.0) * (s + 20.0)) : 0.0; },
        Representation::out_translation);
    CHECK(diff_norm(project_out_Dplus(left), left) == 0.0);
    const auto right = translation_state(
        g, [](double s) { return s > 1.0 ? std::exp(-0.5 * (s - 20.0) * (s - 20.0)) : 0.0; },
        Representation::out_translation);
    CHECK(project_out_Dplus(right).norm() == 0.0);
    const auto spec = to_spectral(left);
    CHECK(diff_norm(project_out_Dplus(spec), spec) < 1e-13);
}

TEST_CASE("resonant state") {
    FlatSetup s;
    const auto R = resonant_state(s.poles[0], unit2(), s.grid);
    CHECK(std::abs(R.norm() - 1.0) < 1e-10);
    CHECK(diff_norm(project_out_Dplus(R), R) < 1e-6);
    CHECK(diff_norm(project_out_Dminus(R, s.sc), R) < 1e-6);

    // grid-periodic kernel: discrete Parseval with aliased geometric coefficients
    const cplx mu = s.poles[0].mu;
    const double ds = s.grid.ds(), N = static_cast<double>(s.grid.N);
    const double q = std::exp(mu.imag() * ds), qN = std::pow(q, N);
    const double raw = resonant_state(s.poles[0], unit2(), s.grid, ResonantSampling::grid_periodic, false).norm();
    const double periodic_oracle = 4.0 * mu.imag() * mu.imag() * s.grid.dsigma() * ds * ds * N * (1.0 + qN) /
                                   ((1.0 - q * q) * (1.0 - qN));
    CHECK(raw * raw == doctest::Approx(periodic_oracle).epsilon(1e-10));
    // direct kernel: trapezoid of (2 Im mu)^2/|sigma - mu|^2 over [-Omega, Omega]
    const double b = -mu.imag(), a = mu.real(), W = s.grid.Omega;
    const double direct_oracle = 4.0 * b * b * (std::atan((W - a) / b) + std::atan((W + a) / b)) / b;
    const double direct = resonant_state(s.poles[0], unit2(), s.grid, ResonantSampling::direct, false).norm();
    CHECK(direct * direct == doctest::Approx(direct_oracle).epsilon(1e-6));
    // both tend to the full-line value 4 pi |Im mu|
    CHECK(direct_oracle == doctest::Approx(4.0 * pi * b).epsilon(0.01));

    ResonancePole real;
    real.mu = 1.0;
    CHECK_THROWS_AS(resonant_state(real, unit2(), s.grid), ValidationError);
}

TEST_CASE("D- projection") {
    FlatSetup s;
    // incoming translation state on s < 0, mapped to the outgoing picture by S
    auto in = translation_state(
        s.grid, [](double x) { return x < -1.0 ? std::exp(-0.5 * (x + 15.0) * (x + 15.0)) : 0.0; },
        Representation::in_translation, 2);
    const auto in_spec = to_spectral(in);
    FoliatedState out = in_spec;
    out.rep = Representation::out_spectral;
    for (Eigen::Index j = 0; j < out.samples.rows(); ++j) {
        const Eigen::VectorXcd v = in_spec.samples.row(j).transpose();
        const Eigen::VectorXcd w = v + (s.sc.s(j) - 1.0) * (s.sc.P * v);
        out.samples.row(j) = w.transpose();
    }
    CHECK(project_out_Dminus(out, s.sc).norm() < 1e-12 * out.norm());

    const auto free_sc = grid_scattering(params(0.0), s.density, unit2(), s.grid, {});
    std::mt19937_64 rng(8);
    const auto F = random_state(s.grid, rng);
    auto truncated = to_translation(F);
    for (std::size_t k = 0; k <= s.grid.N / 2; ++k) truncated.samples.row(static_cast<Eigen::Index>(k)).setZero();
    CHECK(diff_norm(to_translation(project_out_Dminus(F, free_sc)), truncated) < 1e-13);
}

TEST_CASE("semigroup Z") {
    FlatSetup s;
    const auto R = resonant_state(s.poles[0], unit2(), s.grid);
    const auto Z1 = semigroup_Z(R, 1.0, s.sc);
    CHECK(Z1.norm() == doctest::Approx(std::exp(-0.1)).epsilon(1e-3));
    FoliatedState expect = R;
    expect.samples *= std::exp(-I * s.poles[0].mu);
    CHECK(diff_norm(Z1, expect) < 1e-3);
    CHECK_THROWS_AS(semigroup_Z(R, -1.0, s.sc), ValidationError);

    std::mt19937_64 rng(21);
    for (int i = 0; i < 3; ++i) {
        const auto f = random_state(s.grid, rng);
        const double n0 = f.norm(), n1 = semigroup_Z(f, 1.0, s.sc).norm(), n2 = semigroup_Z(f, 2.0, s.sc).norm();
        CHECK(n1 <= n0 * (1.0 + 1e-12));
        CHECK(n2 <= n1 * (1.0 + 1e-12));
        const auto k = project_K(f, s.sc);
        CHECK(diff_norm(semigroup_Z(k, 0.0, s.sc), k) < 1e-8 * std::max(1.0, k.norm()));
    }
}

TEST_CASE("semigroup is exact at lattice times") {
    // the band-limited grid commutes with P_K exactly when tau is a multiple of ds
    FlatSetup s;
    std::mt19937_64 rng(4);
    const auto f = project_K(random_state(s.grid, rng), s.sc);
    const double t1 = 3 * s.grid.ds(), t2 = 5 * s.grid.ds();
    const auto a = semigroup_Z(semigroup_Z(f, t2, s.sc), t1, s.sc);
    const auto b = semigroup_Z(f, t1 + t2, s.sc);
    CHECK(diff_norm(a, b) < 1e-12);
}

TEST_CASE("D+ invariance under forward evolution") {
    const auto g = FoliationGrid::make(4096, 20.0);
    const double taus[] = {0.5, 1.0, 5.0};
    CHECK(check_Dplus_invariance(g, taus) < 1e-6);
    const double zero[] = {0.0};
    CHECK(check_Dplus_invariance(g, zero) == 0.0);
    const double back[] = {-1.0};
    CHECK_THROWS_AS(check_Dplus_invariance(g, back), ValidationError);

    // a state in (0, 1) shifted left by one leaves the subspace
    const auto fine = FoliationGrid::make(4096, 100.0);
    const auto bump = translation_state(
        fine, [](double s) { return s > 0.0 && s < 1.0 ? std::sin(pi * s) * std::sin(pi * s) : 0.0; },
        Representation::out_translation);
    CHECK(dplus_leakage(bump, -1.0) > 0.5);
    CHECK(dplus_leakage(bump, 0.0) == 0.0);
}

TEST_CASE("expectation values") {
    FlatSetup s;
    const auto R = to_translation(resonant_state(s.poles[0], unit2(), s.grid));
    auto id = [](double) { return Eigen::MatrixXcd::Identity(2, 2); };
    CHECK(expectation(R, id) == doctest::Approx(1.0).epsilon(1e-10));
    // the grid carries the s = 0 sample on the incoming side of the cut
    auto past = [](double x) { return Eigen::MatrixXcd((x <= 0.0 ? 1.0 : 0.0) * Eigen::MatrixXcd::Identity(2, 2)); };
    CHECK(expectation(R, past) > 1.0 - 1e-6);

    const double s0 = 7.3;
    auto G = translation_state(s.grid, [s0](double x) { return std::exp(-0.5 * (x - s0) * (x - s0)); },
                               Representation::out_translation);
    G.samples /= G.norm();
    auto pos = [](double x) { return Eigen::MatrixXcd(x * Eigen::MatrixXcd::Identity(1, 1)); };
    CHECK(std::abs(expectation(G, pos) - s0) < 1e-6);

    auto skew = [](double) {
        Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(2, 2);
        a(0, 1) = 1.0;
        return a;
    };
    CHECK_THROWS_AS(expectation(R, skew), ValidationError);
    CHECK_THROWS_AS(expectation(to_spectral(R), id), ValidationError);
}
