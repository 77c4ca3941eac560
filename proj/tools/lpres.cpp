#include "lpres/cli.hpp"
#include "lpres/errors.hpp"

#include <CLI11.hpp>
#include <tbb/global_control.h>

#include <cstdlib>
#include <iostream>
#include <map>
#include <memory>

int main(int argc, char** argv) {
    CLI::App app{"lpres: resonance and decay lab for the relativistic Lee-Friedrichs model"};
    app.require_subcommand(1, 1);
    std::string config_path, out_dir, format;
    const std::map<std::string, std::string> about{
        {"density", "tabulate rho(lambda)"},
        {"hfunc", "boundary values h_plus(sigma)"},
        {"pole", "second-sheet resonance poles and residues"},
        {"smatrix", "s(sigma), unwrapped phase and inner factorization"},
        {"evolve", "semigroup Z(tau) acting on the resonant state"},
        {"survival", "survival amplitude against the exponential law"},
        {"galilean", "1/c^2 residuals of the nonrelativistic limit"},
        {"report", "all of the above in one report.json"},
    };
    for (const auto& name : lpres::cli::subcommands()) {
        auto* sub = app.add_subcommand(name, about.at(name));
        sub->add_option("--config", config_path, "INI config, or a report.json to re-run")->required();
        sub->add_option("--out", out_dir, "output directory (overrides [output] directory)");
        sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    // LPRES_THREADS caps the TBB worker count; output does not depend on it
    std::unique_ptr<tbb::global_control> threads;
    if (const char* env = std::getenv("LPRES_THREADS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n < 1) {
            std::cerr << "error: LPRES_THREADS must be a positive integer\n";
            return 1;
        }
        threads = std::make_unique<tbb::global_control>(tbb::global_control::max_allowed_parallelism,
                                                        static_cast<std::size_t>(n));
    }

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        lpres::cli::RunConfig config = lpres::cli::load_config_file(config_path);
        if (!out_dir.empty()) config.out_dir = out_dir;
        if (!format.empty()) config.format = format;
        lpres::cli::run_subcommand(name, config, std::cerr);
    } catch (const lpres::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const lpres::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
