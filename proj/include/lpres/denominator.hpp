#pragma once

#include "lpres/model.hpp"

#include <span>
#include <vector>

namespace lpres {

struct BoundaryValue {
    double sigma = 0.0;
    cplx h_plus;
    cplx h_minus;
    double pv_part = 0.0;
    double rho = 0.0;
};

enum class Sheet { physical, second };

struct ResonancePole {
    cplx mu;
    cplx residue;
    int iterations = 0;
    double final_step = 0.0;
    double final_abs_h = 0.0;
    Sheet sheet = Sheet::second;
};

// automatic uses closed forms where they exist; quadrature forces the numeric path
enum class DispersionPath { automatic, quadrature };

struct PoleOptions {
    int max_iterations = 100;
    double tol_h = 1e-12;
    double tol_step = 1e-12;
    int stagnation_limit = 20;
};

struct Rectangle {
    double re_min = 0.0;
    double re_max = 2.0;
    double im_min = -0.3;
    double im_max = 0.0;
};

cplx cauchy_transform(const SpectralDensity& density, cplx z, DispersionPath path = DispersionPath::automatic,
                      double* error = nullptr);

cplx h_upper(const ModelParameters& params, const SpectralDensity& density, cplx z,
             DispersionPath path = DispersionPath::automatic);

BoundaryValue h_boundary(const ModelParameters& params, const SpectralDensity& density, double sigma,
                         DispersionPath path = DispersionPath::automatic);

// (C(sigma - i eps) - C(sigma + i eps))/(2 pi i): the jump of h with the trivial 2 i eps removed
double plemelj_jump(const ModelParameters& params, const SpectralDensity& density, double sigma, double eps);

// |extrapolated jump - rho(sigma)|, polynomial (Neville) extrapolation to eps = 0
double plemelj_residual(const ModelParameters& params, const SpectralDensity& density, double sigma,
                        std::span<const double> eps);

// Continuation of h from above through the cut; Im z <= 0 (Im z == 0 gives h_plus).
cplx h_second_sheet(const ModelParameters& params, const SpectralDensity& density, cplx z);

// h_upper above the axis, second sheet on and below it
cplx h_continued(const ModelParameters& params, const SpectralDensity& density, cplx z);

// derivative of h_continued
cplx h_derivative(const ModelParameters& params, const SpectralDensity& density, cplx z);

ResonancePole find_pole(const ModelParameters& params, const SpectralDensity& density, cplx seed,
                        const PoleOptions& options = {});

std::vector<ResonancePole> find_all_poles(const ModelParameters& params, const SpectralDensity& density,
                                          const Rectangle& rect, int n_re = 5, int n_im = 5,
                                          const PoleOptions& options = {}, double dedup_radius = 1e-8);

// second-order estimate omega_V + PV(omega_V) - i pi rho(omega_V); error O(g^4)
cplx weak_coupling_estimate(const ModelParameters& params, const SpectralDensity& density);

}  // namespace lpres
