#include "lpres/galilean.hpp"

#include "lpres/errors.hpp"

#include <cmath>

namespace lpres {

namespace {

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 minus(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

}  // namespace

void validate(const KinematicConfig& config) {
    if (!(config.M_V > 0.0) || !(config.M_N > 0.0) || !(config.M_theta > 0.0)) {
        throw ValidationError("nonpositive mass");
    }
    if (!(config.c > 0.0)) throw ValidationError("speed of light must be positive");
}

double mass_defect(const KinematicConfig& config) { return config.M_V - config.M_N - config.M_theta; }

double epsilon_defect(const KinematicConfig& config) { return config.eps_V - config.eps_N - config.eps_theta; }

double relativistic_inequality_gap(const KinematicConfig& config) {
    validate(config);
    const double c2 = config.c * config.c;
    const Vec3 q = minus(config.p_vec, config.k_vec);
    const double rest = 0.5 * mass_defect(config) * c2;
    const double fluct = epsilon_defect(config);
    const double quad = config.eps_V * config.eps_V / (2.0 * config.M_V * c2) -
                        config.eps_N * config.eps_N / (2.0 * config.M_N * c2) -
                        config.eps_theta * config.eps_theta / (2.0 * config.M_theta * c2);
    const double kinetic = dot(q, q) / (2.0 * config.M_N) + dot(config.k_vec, config.k_vec) / (2.0 * config.M_theta) -
                           dot(config.p_vec, config.p_vec) / (2.0 * config.M_V);
    return rest + fluct + kinetic + quad;
}

double galilean_kinetic_gap(const KinematicConfig& config, KineticVariant variant) {
    const Vec3 q = minus(config.p_vec, config.k_vec);
    const double mq = variant == KineticVariant::decay_mass ? config.M_N : config.M_V;
    return dot(q, q) / (2.0 * mq) + dot(config.k_vec, config.k_vec) / (2.0 * config.M_theta) -
           dot(config.p_vec, config.p_vec) / (2.0 * config.M_V);
}

LimitScan limit_scan(const KinematicConfig& config, const std::vector<double>& c_values) {
    if (c_values.size() < 2) throw ValidationError("limit_scan needs at least two values of c");
    LimitScan out;
    out.c = c_values;
    KinematicConfig k = config;
    const double galilean = galilean_kinetic_gap(config);
    bool all_small = true;
    for (double c : c_values) {
        k.c = c;
        const double r = relativistic_inequality_gap(k) - galilean;
        out.residual.push_back(r);
        if (std::abs(r) >= 1e-14) all_small = false;
    }
    if (all_small) {
        out.converged = true;
        return out;
    }
    // least-squares slope of log|residual| against log c over the nonzero residuals
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < c_values.size(); ++i) {
        if (out.residual[i] == 0.0) continue;
        const double x = std::log(c_values[i]);
        const double y = std::log(std::abs(out.residual[i]));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) throw NumericalError("limit_scan: fewer than two nonzero residuals for the slope fit");
    out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return out;
}

double time_rate(double p2, double M, double eps, double c, double step) {
    if (!(M > 0.0) || !(c > 0.0)) throw ValidationError("time_rate needs M > 0 and c > 0");
    const double Mc2 = M * c * c;
    // K0 = [p^2/2M - Mc^2/2] - eps - eps^2/(2Mc^2); the bracket is eps independent
    (void)p2;
    const double lin = (-(eps + step) + (eps - step)) / (2.0 * step);
    const double quad = (-(eps + step) * (eps + step) + (eps - step) * (eps - step)) / (2.0 * Mc2 * 2.0 * step);
    return std::abs(lin + quad);
}

}  // namespace lpres
