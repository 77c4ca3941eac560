#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace lpres {

using cplx = std::complex<double>;

struct ModelParameters {
    double M_V = 2.0;
    double M_N = 1.0;
    double M_theta = 1.0;
    double omega_V = 1.0;
    // foliation momentum in 1+1 signature (-,+)
    double p_t = 0.0;
    double p_x = 0.0;
    // g == 0 decouples the level from the continuum regardless of density
    double g = 0.2;
};

enum class DensityVariant { flat, lorentzian, gaussian, tabulated, form_factor };

std::string to_string(DensityVariant v);

enum class Signature { minkowski, euclidean };

struct FormFactorProfile {
    std::function<double(double)> g_profile;
    std::vector<cplx> u;
    bool factorized = true;
    // used instead of g_profile when factorized == false, one per component
    std::vector<std::function<double(double)>> component_profiles;
    // Euclidean momentum envelope exp(-(k_t^2 + k_x^2)/kappa^2); the hyperbolic
    // level sets have infinite measure without it
    double envelope_scale = 4.0;
    Signature signature = Signature::minkowski;
};

class SpectralDensity {
public:
    static SpectralDensity flat(double gamma_total);
    // g2 is the coupling squared multiplying the normalized line shape
    static SpectralDensity lorentzian(double lambda0, double gamma, double g2);
    static SpectralDensity gaussian(double lambda0, double width, double g2);
    static SpectralDensity tabulated(std::vector<double> lambdas, std::vector<double> values);
    // Tabulates the level-set integral on lambda_grid; behaves as a table afterwards.
    static SpectralDensity from_form_factor(const FormFactorProfile& profile,
                                            const ModelParameters& params,
                                            std::vector<double> lambda_grid);

    DensityVariant variant() const { return variant_; }
    bool continuation_available() const;
    bool is_table() const;

    double value(double lambda) const;
    double derivative(double lambda) const;
    cplx continued(cplx z) const;
    cplx continued_derivative(cplx z) const;
    // limit of rho at +-infinity (nonzero only for the flat band)
    double asymptotic_constant() const;
    // poles of the continued density in the open upper half-plane
    std::vector<cplx> continuation_poles_upper() const;

    // characteristic location and width, used to place quadrature breakpoints
    double center() const;
    double scale() const;

    double gamma_total() const { return gamma_total_; }
    double lambda0() const { return lambda0_; }
    double width() const { return width_; }
    double g2() const { return g2_; }
    const std::vector<double>& table_lambdas() const { return lam_; }
    const std::vector<double>& table_values() const { return val_; }

private:
    DensityVariant variant_ = DensityVariant::flat;
    double gamma_total_ = 0.0;
    double lambda0_ = 0.0;
    double width_ = 0.0;
    double g2_ = 0.0;
    std::vector<double> lam_;
    std::vector<double> val_;
};

// Throws ValidationError naming the first violated invariant.
void validate(const ModelParameters& params, const SpectralDensity& density);

double density_value(const SpectralDensity& density, double lambda);

struct LevelSetResult {
    double value = 0.0;
    double error = 0.0;
};

// rho_p(lambda) = \int d^2k |f(k)|^2 delta(lambda - omega(p,k)) in 1+1 dimensions
LevelSetResult density_from_form_factor(const FormFactorProfile& profile,
                                        const ModelParameters& params, double lambda);

}  // namespace lpres
