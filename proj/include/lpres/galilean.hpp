#pragma once

#include <array>
#include <string>
#include <vector>

namespace lpres {

using Vec3 = std::array<double, 3>;

struct KinematicConfig {
    Vec3 p_vec{0.0, 0.0, 0.0};
    Vec3 k_vec{0.0, 0.0, 0.0};
    double M_V = 2.0;
    double M_N = 1.0;
    double M_theta = 1.0;
    double eps_V = 0.0;
    double eps_N = 0.0;
    double eps_theta = 0.0;
    double c = 1.0;
};

enum class KineticVariant {
    decay_mass,  // (p-k)^2/2M_N, the limit of the relativistic inequality
    as_printed   // (p-k)^2/2M_V
};

void validate(const KinematicConfig& config);

double mass_defect(const KinematicConfig& config);
double epsilon_defect(const KinematicConfig& config);

// LHS - RHS of the relativistic decay inequality at finite c; each
// (eps + Mc^2)^2/(2Mc^2) is expanded exactly as Mc^2/2 + eps + eps^2/(2Mc^2)
// so that large c does not cancel catastrophically
double relativistic_inequality_gap(const KinematicConfig& config);

double galilean_kinetic_gap(const KinematicConfig& config, KineticVariant variant = KineticVariant::decay_mass);

struct LimitScan {
    std::vector<double> c;
    std::vector<double> residual;
    double slope = 0.0;
    bool converged = false;  // every residual below 1e-14: no slope fitted
};

LimitScan limit_scan(const KinematicConfig& config, const std::vector<double>& c_values);

// |dK0/d eps| by a central difference of K0 = p^2/2M - (eps + Mc^2)^2/2Mc^2;
// the sign is convention dependent and is not reported
double time_rate(double p2, double M, double eps, double c, double step = 0x1p-20);

}  // namespace lpres
