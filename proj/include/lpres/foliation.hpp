#pragma once

#include "lpres/denominator.hpp"
#include "lpres/smatrix.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace lpres {

// sigma_j = -Omega + j dsigma, s_k = (k - N/2) ds, dsigma = 2 Omega/N, ds = pi/Omega
struct FoliationGrid {
    std::size_t N = 16384;
    double Omega = 20.0;

    static FoliationGrid make(std::size_t N, double Omega);
    double dsigma() const { return 2.0 * Omega / static_cast<double>(N); }
    double ds() const;
    double sigma(std::size_t j) const { return -Omega + static_cast<double>(j) * dsigma(); }
    double s(std::size_t k) const;
};

enum class Representation { out_spectral, out_translation, in_spectral, in_translation };

std::string to_string(Representation r);

struct FoliatedState {
    Eigen::MatrixXcd samples;  // N x d
    Representation rep = Representation::out_spectral;
    FoliationGrid grid;

    double norm() const;
    bool spectral() const { return rep == Representation::out_spectral || rep == Representation::in_spectral; }
};

// f(s) = (2 pi)^{-1/2} \int dsigma e^{i sigma s} F(sigma), discretized as a unitary DFT pair
FoliatedState to_translation(const FoliatedState& state);
FoliatedState to_spectral(const FoliatedState& state);

// multiply by exp(-i sigma tau); a right shift by tau in the translation picture
FoliatedState evolve_free(const FoliatedState& state, double tau);

// The S-matrix sampled on the grid in a form that is exactly inner there when
// the continuum factorization is rational (see grid_scattering).
struct GridScattering {
    FoliationGrid grid;
    Eigen::VectorXcd s;   // scalar S on sigma_j, unit modulus
    Eigen::MatrixXcd P;   // auxiliary projector, d x d
    std::vector<cplx> blaschke_zeros;
    InnerClass classification = InnerClass::inner_rational;
    double max_unitarity_deviation = 0.0;
    std::vector<std::string> warnings;
};

// Blaschke factors are replaced by their grid-periodic counterparts
// sin((sigma - mu*) ds/2)/sin((sigma - mu) ds/2); the residual s/prod(B) is sampled.
GridScattering grid_scattering(const ModelParameters& params, const SpectralDensity& density,
                               const AuxiliaryVector& aux, const FoliationGrid& grid,
                               const std::vector<ResonancePole>& poles);

// zero the out-translation samples at s > 0
FoliatedState project_out_Dplus(const FoliatedState& state);
// map to the incoming picture, zero the in-translation samples at s <= 0, map back
FoliatedState project_out_Dminus(const FoliatedState& state, const GridScattering& scattering);
FoliatedState project_K(const FoliatedState& state, const GridScattering& scattering);

// P_K U(tau) P_K
FoliatedState semigroup_Z(const FoliatedState& state, double tau, const GridScattering& scattering);

enum class ResonantSampling { grid_periodic, direct };

// 2i Im(mu) u/(sigma - mu); grid_periodic replaces 1/(sigma - mu) with
// -i ds/(1 - exp(i (sigma - mu) ds)), whose transform is exactly one-sided
FoliatedState resonant_state(const ResonancePole& pole, const AuxiliaryVector& aux, const FoliationGrid& grid,
                             ResonantSampling sampling = ResonantSampling::grid_periodic, bool normalize = true);

// norm fraction at s <= 0 of an out-translation state after free evolution by tau
double dplus_leakage(const FoliatedState& state, double tau);

double check_Dplus_invariance(const FoliationGrid& grid, std::span<const double> taus, std::uint64_t seed = 7,
                              int n_states = 8);

double expectation(const FoliatedState& state, const std::function<Eigen::MatrixXcd(double)>& A);

}  // namespace lpres
