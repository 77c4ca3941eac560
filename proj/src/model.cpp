#include "lpres/model.hpp"

#include "lpres/errors.hpp"
#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace lpres {

namespace {

constexpr double pi = std::numbers::pi;

const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * pi);

std::size_t segment_of(const std::vector<double>& lam, double x) {
    if (!(x >= lam.front() && x <= lam.back())) {
        throw ValidationError("lambda outside table range [" + std::to_string(lam.front()) + ", " +
                              std::to_string(lam.back()) + "]");
    }
    auto it = std::upper_bound(lam.begin(), lam.end(), x);
    std::size_t i = static_cast<std::size_t>(it - lam.begin());
    if (i == 0) i = 1;
    if (i >= lam.size()) i = lam.size() - 1;
    return i - 1;
}

}  // namespace

std::string to_string(DensityVariant v) {
    switch (v) {
        case DensityVariant::flat: return "flat";
        case DensityVariant::lorentzian: return "lorentzian";
        case DensityVariant::gaussian: return "gaussian";
        case DensityVariant::tabulated: return "tabulated";
        case DensityVariant::form_factor: return "form_factor";
    }
    return "unknown";
}

SpectralDensity SpectralDensity::flat(double gamma_total) {
    SpectralDensity d;
    d.variant_ = DensityVariant::flat;
    d.gamma_total_ = gamma_total;
    return d;
}

SpectralDensity SpectralDensity::lorentzian(double lambda0, double gamma, double g2) {
    SpectralDensity d;
    d.variant_ = DensityVariant::lorentzian;
    d.lambda0_ = lambda0;
    d.width_ = gamma;
    d.g2_ = g2;
    return d;
}

SpectralDensity SpectralDensity::gaussian(double lambda0, double width, double g2) {
    SpectralDensity d;
    d.variant_ = DensityVariant::gaussian;
    d.lambda0_ = lambda0;
    d.width_ = width;
    d.g2_ = g2;
    return d;
}

SpectralDensity SpectralDensity::tabulated(std::vector<double> lambdas, std::vector<double> values) {
    SpectralDensity d;
    d.variant_ = DensityVariant::tabulated;
    d.lam_ = std::move(lambdas);
    d.val_ = std::move(values);
    return d;
}

SpectralDensity SpectralDensity::from_form_factor(const FormFactorProfile& profile,
                                                  const ModelParameters& params,
                                                  std::vector<double> lambda_grid) {
    std::vector<double> values;
    values.reserve(lambda_grid.size());
    for (double l : lambda_grid) values.push_back(density_from_form_factor(profile, params, l).value);
    SpectralDensity d = tabulated(std::move(lambda_grid), std::move(values));
    d.variant_ = DensityVariant::form_factor;
    return d;
}

bool SpectralDensity::continuation_available() const {
    return variant_ == DensityVariant::flat || variant_ == DensityVariant::lorentzian ||
           variant_ == DensityVariant::gaussian;
}

bool SpectralDensity::is_table() const {
    return variant_ == DensityVariant::tabulated || variant_ == DensityVariant::form_factor;
}

double SpectralDensity::value(double lambda) const {
    switch (variant_) {
        case DensityVariant::flat: return gamma_total_ / (2.0 * pi);
        case DensityVariant::lorentzian: {
            const double x = lambda - lambda0_;
            return g2_ * width_ / pi / (x * x + width_ * width_);
        }
        case DensityVariant::gaussian: {
            const double x = (lambda - lambda0_) / width_;
            return g2_ * inv_sqrt_2pi / width_ * std::exp(-0.5 * x * x);
        }
        default: break;
    }
    const std::size_t i = segment_of(lam_, lambda);
    const double t = (lambda - lam_[i]) / (lam_[i + 1] - lam_[i]);
    return val_[i] + t * (val_[i + 1] - val_[i]);
}

double SpectralDensity::derivative(double lambda) const {
    switch (variant_) {
        case DensityVariant::flat: return 0.0;
        case DensityVariant::lorentzian: {
            const double x = lambda - lambda0_;
            const double q = x * x + width_ * width_;
            return -2.0 * g2_ * width_ / pi * x / (q * q);
        }
        case DensityVariant::gaussian: return -(lambda - lambda0_) / (width_ * width_) * value(lambda);
        default: break;
    }
    const std::size_t i = segment_of(lam_, lambda);
    return (val_[i + 1] - val_[i]) / (lam_[i + 1] - lam_[i]);
}

cplx SpectralDensity::continued(cplx z) const {
    switch (variant_) {
        case DensityVariant::flat: return gamma_total_ / (2.0 * pi);
        case DensityVariant::lorentzian: {
            const cplx x = z - lambda0_;
            return g2_ * width_ / pi / (x * x + width_ * width_);
        }
        case DensityVariant::gaussian: {
            const cplx x = (z - lambda0_) / width_;
            return g2_ * inv_sqrt_2pi / width_ * std::exp(-0.5 * x * x);
        }
        default: break;
    }
    throw ValidationError("continuation unavailable for " + to_string(variant_) + " density");
}

cplx SpectralDensity::continued_derivative(cplx z) const {
    switch (variant_) {
        case DensityVariant::flat: return 0.0;
        case DensityVariant::lorentzian: {
            const cplx x = z - lambda0_;
            const cplx q = x * x + width_ * width_;
            return -2.0 * g2_ * width_ / pi * x / (q * q);
        }
        case DensityVariant::gaussian: return -(z - lambda0_) / (width_ * width_) * continued(z);
        default: break;
    }
    throw ValidationError("continuation unavailable for " + to_string(variant_) + " density");
}

double SpectralDensity::asymptotic_constant() const {
    return variant_ == DensityVariant::flat ? gamma_total_ / (2.0 * pi) : 0.0;
}

std::vector<cplx> SpectralDensity::continuation_poles_upper() const {
    if (variant_ == DensityVariant::lorentzian) return {cplx(lambda0_, width_)};
    return {};
}

double SpectralDensity::center() const {
    switch (variant_) {
        case DensityVariant::flat: return 0.0;
        case DensityVariant::lorentzian:
        case DensityVariant::gaussian: return lambda0_;
        default: return 0.5 * (lam_.front() + lam_.back());
    }
}

double SpectralDensity::scale() const {
    switch (variant_) {
        case DensityVariant::flat: return gamma_total_;
        case DensityVariant::lorentzian:
        case DensityVariant::gaussian: return width_;
        default: return lam_.back() - lam_.front();
    }
}

void validate(const ModelParameters& params, const SpectralDensity& density) {
    if (!(params.M_V > 0.0) || !(params.M_N > 0.0) || !(params.M_theta > 0.0)) {
        throw ValidationError("nonpositive mass");
    }
    if (!(params.g >= 0.0) || !std::isfinite(params.g)) throw ValidationError("negative coupling");
    if (!std::isfinite(params.omega_V)) throw ValidationError("omega_V is not finite");
    if (!std::isfinite(params.p_t) || !std::isfinite(params.p_x)) {
        throw ValidationError("foliation momentum is not finite");
    }
    switch (density.variant()) {
        case DensityVariant::flat:
            if (!(density.gamma_total() > 0.0)) throw ValidationError("flat density needs gamma_total > 0");
            return;
        case DensityVariant::lorentzian:
            if (!(density.width() > 0.0)) throw ValidationError("lorentzian density needs gamma > 0");
            if (!(density.g2() >= 0.0)) throw ValidationError("negative density sample");
            return;
        case DensityVariant::gaussian:
            if (!(density.width() > 0.0)) throw ValidationError("gaussian density needs width > 0");
            if (!(density.g2() >= 0.0)) throw ValidationError("negative density sample");
            return;
        default: break;
    }
    const auto& lam = density.table_lambdas();
    const auto& val = density.table_values();
    if (lam.size() != val.size()) throw ValidationError("table size mismatch");
    if (lam.size() < 2) throw ValidationError("table needs at least two points");
    for (std::size_t i = 0; i < lam.size(); ++i) {
        if (!std::isfinite(lam[i]) || !std::isfinite(val[i])) throw ValidationError("non-finite table entry");
        if (i > 0 && !(lam[i] > lam[i - 1])) throw ValidationError("unsorted table");
        if (val[i] < 0.0) throw ValidationError("negative density sample");
    }
}

double density_value(const SpectralDensity& density, double lambda) { return density.value(lambda); }

LevelSetResult density_from_form_factor(const FormFactorProfile& profile, const ModelParameters& params,
                                        double lambda) {
    if (profile.u.empty()) throw ValidationError("form factor needs d >= 1");
    double unorm2 = 0.0;
    for (auto c : profile.u) unorm2 += std::norm(c);
    if (!(unorm2 > 0.0)) throw ValidationError("form factor direction has zero norm");
    if (!(profile.envelope_scale > 0.0)) throw ValidationError("envelope_scale must be positive");

    double weight = 0.0;  // |f|^2 without the envelope, constant on the level set
    if (profile.factorized) {
        if (!profile.g_profile) throw ValidationError("form factor profile missing");
        const double g = profile.g_profile(lambda);
        weight = g * g * unorm2;
    } else {
        if (profile.component_profiles.size() != profile.u.size()) {
            throw ValidationError("need one profile per component");
        }
        for (std::size_t a = 0; a < profile.u.size(); ++a) {
            const double g = profile.component_profiles[a](lambda);
            weight += g * g * std::norm(profile.u[a]);
        }
    }
    if (weight == 0.0) return {};

    // omega = (a+b) Q(k - k*) + c Q(p)
    const double a = 0.5 / params.M_N;
    const double b = 0.5 / params.M_theta;
    const double c = a * b / (a + b);
    const bool mink = profile.signature == Signature::minkowski;
    const double Qp = mink ? (-params.p_t * params.p_t + params.p_x * params.p_x)
                           : (params.p_t * params.p_t + params.p_x * params.p_x);
    const double r = (lambda - c * Qp) / (a + b);
    const double kt0 = a * params.p_t / (a + b);
    const double kx0 = a * params.p_x / (a + b);
    const double kap2 = profile.envelope_scale * profile.envelope_scale;
    auto envelope = [&](double kt, double kx) { return std::exp(-(kt * kt + kx * kx) / kap2); };

    const double inf = std::numeric_limits<double>::infinity();
    double measure = 0.0;
    double err = 0.0;
    if (mink) {
        if (r == 0.0) throw NumericalError("light-cone level set: level-set measure diverges");
        const double rr = std::sqrt(std::abs(r));
        for (int branch : {-1, 1}) {
            auto f = [&](double eta) {
                const double ch = std::cosh(eta), sh = std::sinh(eta);
                return r > 0.0 ? envelope(kt0 + rr * sh, kx0 + branch * rr * ch)
                               : envelope(kt0 + branch * rr * ch, kx0 + rr * sh);
            };
            double e = 0.0;
            measure += 0.5 * detail::integrate_gk(f, -inf, inf, 15, 1e-12, &e);
            err += 0.5 * e;
        }
    } else {
        if (r < 0.0) return {};
        const double rr = std::sqrt(r);
        auto f = [&](double th) { return envelope(kt0 + rr * std::cos(th), kx0 + rr * std::sin(th)); };
        double e = 0.0;
        measure = 0.5 * detail::integrate_gk(f, 0.0, 2.0 * pi, 15, 1e-12, &e);
        err = 0.5 * e;
    }
    if (!(err <= 1e-8 * std::max(1.0, std::abs(measure)))) {
        throw NumericalError("level-set quadrature did not converge (achieved " + std::to_string(err) + ")");
    }
    return {weight * measure / (a + b), weight * err / (a + b)};
}

}  // namespace lpres
