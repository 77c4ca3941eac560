#pragma once

#include "lpres/denominator.hpp"
#include "lpres/model.hpp"

#include <span>
#include <vector>

namespace lpres {

// uniform lambda grid, n points including both ends
struct MeasureGrid {
    double lo = -50.0;
    double hi = 50.0;
    std::size_t n = 16001;
};

struct SpectralMeasure {
    std::vector<double> grid;
    std::vector<double> weights;  // rho/|h_plus|^2 on grid
    double total_mass = 0.0;

    // Lorentzian alpha (kappa/pi)/((l - center)^2 + kappa^2) transformed analytically;
    // it carries the 1/l^2 tails of a flat band, zero otherwise
    double model_amplitude = 0.0;
    double model_center = 0.0;
    double model_width = 1.0;
    double tail_mass = 0.0;  // |w - model| mass outside the grid range

    ModelParameters params;
    SpectralDensity density = SpectralDensity::flat(1.0);

    double weight(double lambda) const;
    double model(double lambda) const;
};

MeasureGrid default_measure_grid(const ModelParameters& params, const SpectralDensity& density);

SpectralMeasure spectral_measure(const ModelParameters& params, const SpectralDensity& density,
                                 const MeasureGrid& grid);
SpectralMeasure spectral_measure(const ModelParameters& params, const SpectralDensity& density);

struct AmplitudeOptions {
    double refine_tol = 1e-7;
    std::size_t max_points = std::size_t{1} << 24;
};

// A(tau) = \int w(l) exp(-i l tau) dl; the grid is halved until |A| at the largest
// |tau| changes by less than refine_tol
std::vector<cplx> survival_amplitudes(const SpectralMeasure& measure, std::span<const double> taus,
                                      const AmplitudeOptions& options = {});
cplx survival_amplitude(const SpectralMeasure& measure, double tau, const AmplitudeOptions& options = {});

double semigroup_defect(const SpectralMeasure& measure, double tau1, double tau2,
                        const AmplitudeOptions& options = {});

struct ExponentialRow {
    double tau = 0.0;
    double abs_A = 0.0;
    double exp_pure = 0.0;     // exp(Im mu tau)
    double exp_residue = 0.0;  // |r| exp(Im mu tau)
    double deviation = 0.0;    // | |A| - |r| exp(Im mu tau) |
};

std::vector<ExponentialRow> compare_exponential(const SpectralMeasure& measure, const ResonancePole& pole,
                                                std::span<const double> taus, const AmplitudeOptions& options = {});

}  // namespace lpres
