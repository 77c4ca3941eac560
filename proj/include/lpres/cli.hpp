#pragma once

#include "lpres/denominator.hpp"
#include "lpres/galilean.hpp"
#include "lpres/model.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace lpres::cli {

using Sections = std::map<std::string, std::map<std::string, std::string>>;

struct DensitySpec {
    std::string variant = "flat";
    double gamma_total = 0.2;
    double lambda0 = 1.0;
    double gamma = 0.1;
    double width = 1.0;
    std::vector<double> lambdas;
    std::vector<double> values;
    // form_factor: gaussian energy profile on a tabulated lambda range
    double profile_amplitude = 0.1;
    double profile_center = 1.0;
    double profile_width = 1.0;
    double envelope_scale = 4.0;
    std::string signature = "minkowski";
    double lambda_min = -5.0;
    double lambda_max = 5.0;
    std::size_t table_points = 401;
};

struct RunConfig {
    ModelParameters model;
    DensitySpec density;
    std::size_t N = 16384;
    double Omega = 20.0;
    double sigma_min = -10.0;
    double sigma_max = 10.0;
    std::size_t points = 1001;
    Rectangle pole_rect{0.0, 2.0, -0.3, 0.0};
    int seeds_re = 5;
    int seeds_im = 5;
    std::vector<double> aux_u{1.0, 0.0};
    std::vector<double> evolve_taus{0.5, 1.0, 2.0};
    double tau_max = 0.0;  // 0: 10/|Im mu|
    std::size_t tau_points = 51;
    KinematicConfig kinematics;
    std::vector<double> c_values{10.0, 100.0, 1000.0, 10000.0};
    std::string kinetic_variant = "decay_mass";
    PoleOptions pole_options;
    double dedup_radius = 1e-8;
    double refine_tol = 1e-7;
    std::string out_dir = ".";
    std::string format = "csv";
};

// INI text with [model] [density] [grid] [output] and task sections; throws
// ValidationError with line numbers for syntax errors, names unknown or missing keys
RunConfig parse_config(const std::string& text);
RunConfig config_from_sections(const Sections& sections);
// INI file, or a report JSON whose "config" object is re-ingested
RunConfig load_config_file(const std::string& path);

Sections canonical_sections(const RunConfig& config);
std::string config_hash(const RunConfig& config);

SpectralDensity make_density(const RunConfig& config);

// writes artifacts into config.out_dir; throws ValidationError / NumericalError
void run_subcommand(const std::string& name, const RunConfig& config, std::ostream& log);

const std::vector<std::string>& subcommands();

std::string format_double(double x);

}  // namespace lpres::cli
