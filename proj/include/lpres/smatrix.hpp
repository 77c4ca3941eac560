#pragma once

#include "lpres/denominator.hpp"
#include "lpres/model.hpp"

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lpres {

struct AuxiliaryVector {
    Eigen::VectorXcd components;
    // overall energy profile; n(sigma) = profile(sigma) * u when factorized
    std::function<double(double)> profile = [](double) { return 1.0; };
    // non-factorized mode: n_a(sigma) = g_a(sigma) u_a
    std::optional<std::vector<std::function<double(double)>>> per_component_profiles;

    static AuxiliaryVector unit(Eigen::VectorXcd u);
    Eigen::VectorXcd at(double sigma) const;
};

enum class InnerClass { inner_rational, inner_with_singular_factor, not_inner };

std::string to_string(InnerClass c);

struct InnerFactorization {
    std::vector<cplx> blaschke_zeros;
    std::vector<double> grid;
    std::vector<double> phase_samples;
    // upper-half-plane poles of the continued ratio with multiplicity
    std::vector<std::pair<cplx, int>> defect_factors;
    InnerClass classification = InnerClass::inner_rational;
    bool trivial = false;          // no zeros and residual identically one
    bool real_axis_only = false;   // no continuation: classified from boundary data alone
    double max_residual_deviation = 0.0;  // max |residual - 1|
    double max_residual_modulus_error = 0.0;  // max ||residual| - 1|
};

cplx blaschke_factor(cplx mu, cplx z);

cplx s_scalar(const ModelParameters& params, const SpectralDensity& density, double sigma);

// s continued into the upper half-plane: h from below continued upward over h_upper
cplx s_continued_upper(const ModelParameters& params, const SpectralDensity& density, cplx z);

Eigen::MatrixXcd s_operator(const ModelParameters& params, const SpectralDensity& density,
                            const AuxiliaryVector& aux, double sigma);

// T(sigma + i0) with S = 1 - 2 pi i T
Eigen::MatrixXcd t_matrix(const ModelParameters& params, const SpectralDensity& density, const AuxiliaryVector& aux,
                          double sigma);
// the anti-boundary value T(sigma - i0), built from h_minus
Eigen::MatrixXcd t_matrix_minus(const ModelParameters& params, const SpectralDensity& density,
                                const AuxiliaryVector& aux, double sigma);

Eigen::MatrixXcd projector(const AuxiliaryVector& aux, double sigma);

int winding_number(const ModelParameters& params, const SpectralDensity& density, double Omega, std::size_t N);

InnerFactorization factorize(const ModelParameters& params, const SpectralDensity& density,
                             const std::vector<ResonancePole>& poles, const std::vector<double>& grid);

double unitarity_scan(const ModelParameters& params, const SpectralDensity& density, const std::vector<double>& grid);

// unwrapped arg s(sigma) along a grid, refined between samples so no step exceeds pi/2
std::vector<double> unwrapped_phase(const ModelParameters& params, const SpectralDensity& density,
                                    const std::vector<double>& grid);

}  // namespace lpres
