#include "lpres/cli.hpp"
#include "lpres/errors.hpp"
#include "lpres/foliation.hpp"
#include "lpres/smatrix.hpp"
#include "lpres/survival.hpp"

#include <json.hpp>
#include <tbb/parallel_for.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <unistd.h>

namespace lpres::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

std::string to_csv(const Table& t) {
    std::string out;
    for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_double(row[i]);
        out += '\n';
    }
    return out;
}

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json to_json(const Table& t) {
    json rows = json::array();
    for (const auto& row : t.rows) {
        json r = json::object();
        for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = number(row[i]);
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_atomic(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw ValidationError("cannot write " + tmp.string());
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f) throw ValidationError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return x;
}

std::string pole_skip_reason(const SpectralDensity& d) {
    return "no analytic continuation for the " + to_string(d.variant()) + " density";
}

// shared state so that report computes the pole set once
class Run {
public:
    explicit Run(const RunConfig& c) : config(c), density(make_density(c)) {}

    const RunConfig& config;
    SpectralDensity density;

    const std::vector<ResonancePole>& poles() {
        if (!poles_) {
            poles_ = find_all_poles(config.model, density, config.pole_rect, config.seeds_re, config.seeds_im,
                                    config.pole_options, config.dedup_radius);
        }
        return *poles_;
    }

    // the pole nearest the weak-coupling estimate; ties keep the lower real part
    ResonancePole primary_pole() {
        const auto& ps = poles();
        if (ps.empty()) throw NumericalError("no resonance pole found in the search rectangle");
        const cplx est = weak_coupling_estimate(config.model, density);
        return *std::min_element(ps.begin(), ps.end(), [&](const auto& a, const auto& b) {
            return std::abs(a.mu - est) < std::abs(b.mu - est);
        });
    }

    std::vector<double> sigma_grid() const {
        double lo = config.sigma_min, hi = config.sigma_max;
        if (density.is_table()) {
            lo = std::max(lo, density.table_lambdas().front());
            hi = std::min(hi, density.table_lambdas().back());
            if (!(hi > lo)) throw ValidationError("sigma range does not overlap the density table");
        }
        return linspace(lo, hi, config.points);
    }

private:
    std::optional<std::vector<ResonancePole>> poles_;
};

Table density_table(Run& run) {
    Table t{{"lambda", "rho"}, {}};
    const auto grid = run.sigma_grid();
    t.rows.resize(grid.size());
    tbb::parallel_for(std::size_t{0}, grid.size(), [&](std::size_t i) {
        t.rows[i] = {grid[i], run.density.value(grid[i])};
    });
    return t;
}

Table hfunc_table(Run& run) {
    Table t{{"sigma", "re_h_plus", "im_h_plus"}, {}};
    const auto grid = run.sigma_grid();
    t.rows.resize(grid.size());
    tbb::parallel_for(std::size_t{0}, grid.size(), [&](std::size_t i) {
        const cplx h = h_boundary(run.config.model, run.density, grid[i]).h_plus;
        t.rows[i] = {grid[i], h.real(), h.imag()};
    });
    return t;
}

Table pole_table(Run& run) {
    Table t{{"re_mu", "im_mu", "re_residue", "im_residue", "iterations"}, {}};
    for (const auto& p : run.poles())
        t.rows.push_back({p.mu.real(), p.mu.imag(), p.residue.real(), p.residue.imag(),
                          static_cast<double>(p.iterations)});
    return t;
}

struct SmatrixResult {
    Table table;
    std::vector<std::pair<std::string, std::string>> summary;
    std::string classification;
};

SmatrixResult smatrix_result(Run& run, std::ostream& log) {
    const auto& params = run.config.model;
    SmatrixResult out;
    out.table.columns = {"sigma", "re_s", "im_s", "abs_s", "unwrapped_phase"};
    const auto grid = run.sigma_grid();
    const auto phase = unwrapped_phase(params, run.density, grid);
    out.table.rows.resize(grid.size());
    tbb::parallel_for(std::size_t{0}, grid.size(), [&](std::size_t i) {
        const cplx s = s_scalar(params, run.density, grid[i]);
        out.table.rows[i] = {grid[i], s.real(), s.imag(), std::abs(s), phase[i]};
    });

    std::vector<ResonancePole> poles;
    if (run.density.continuation_available()) {
        poles = run.poles();
    } else {
        log << "smatrix: " << pole_skip_reason(run.density) << "; factorization from boundary data only\n";
    }
    const InnerFactorization f = factorize(params, run.density, poles, grid);
    out.classification = to_string(f.classification);
    auto& s = out.summary;
    s.emplace_back("classification", out.classification);
    s.emplace_back("trivial", f.trivial ? "1" : "0");
    s.emplace_back("real_axis_only", f.real_axis_only ? "1" : "0");
    s.emplace_back("blaschke_zeros", std::to_string(f.blaschke_zeros.size()));
    for (std::size_t i = 0; i < f.blaschke_zeros.size(); ++i) {
        s.emplace_back("re_zero_" + std::to_string(i), format_double(f.blaschke_zeros[i].real()));
        s.emplace_back("im_zero_" + std::to_string(i), format_double(f.blaschke_zeros[i].imag()));
    }
    s.emplace_back("defect_factors", std::to_string(f.defect_factors.size()));
    for (std::size_t i = 0; i < f.defect_factors.size(); ++i) {
        s.emplace_back("re_defect_" + std::to_string(i), format_double(f.defect_factors[i].first.real()));
        s.emplace_back("im_defect_" + std::to_string(i), format_double(f.defect_factors[i].first.imag()));
        s.emplace_back("multiplicity_defect_" + std::to_string(i), std::to_string(f.defect_factors[i].second));
    }
    s.emplace_back("max_residual_deviation", format_double(f.max_residual_deviation));
    s.emplace_back("max_residual_modulus_error", format_double(f.max_residual_modulus_error));
    s.emplace_back("max_unitarity_deviation", format_double(unitarity_scan(params, run.density, grid)));
    if (run.density.is_table()) {
        s.emplace_back("winding_number", "");
        log << "smatrix: winding number needs the full real line; skipped for a tabulated density\n";
    } else {
        s.emplace_back("winding_number",
                       std::to_string(winding_number(params, run.density, run.config.Omega, run.config.N)));
    }
    return out;
}

std::string summary_csv(const std::vector<std::pair<std::string, std::string>>& summary) {
    std::string out = "key,value\n";
    for (const auto& [k, v] : summary) out += k + "," + v + "\n";
    return out;
}

Table evolve_table(Run& run, std::ostream& log) {
    Table t{{"tau", "norm_ratio", "eigen_error"}, {}};
    const ResonancePole pole = run.primary_pole();
    const auto grid = FoliationGrid::make(run.config.N, run.config.Omega);
    Eigen::VectorXcd u(static_cast<Eigen::Index>(run.config.aux_u.size()));
    for (std::size_t i = 0; i < run.config.aux_u.size(); ++i) u[static_cast<Eigen::Index>(i)] = run.config.aux_u[i];
    const auto aux = AuxiliaryVector::unit(u);
    const GridScattering sc = grid_scattering(run.config.model, run.density, aux, grid, run.poles());
    for (const auto& w : sc.warnings) log << "evolve: " << w << "\n";
    const FoliatedState R = resonant_state(pole, aux, grid);
    const double r_norm = R.norm();
    for (double tau : run.config.evolve_taus) {
        FoliatedState Z = semigroup_Z(R, tau, sc);
        const double ratio = Z.norm() / r_norm;
        Z.samples -= std::exp(cplx(0.0, -1.0) * pole.mu * tau) * R.samples;
        t.rows.push_back({tau, ratio, Z.norm() / r_norm});
    }
    return t;
}

Table survival_table(Run& run, std::ostream& log) {
    Table t{{"tau", "abs_A", "exp_model", "deviation"}, {}};
    ResonancePole pole;
    if (run.density.continuation_available()) {
        pole = run.primary_pole();
    } else {
        pole.mu = weak_coupling_estimate(run.config.model, run.density);
        pole.residue = 1.0;
        log << "survival: " << pole_skip_reason(run.density) << "; exp_model uses the weak-coupling estimate\n";
    }
    const double rate = std::abs(pole.mu.imag());
    if (!(rate > 0.0)) throw NumericalError("resonance has zero width; no decay scale for the tau range");
    double tau_max = run.config.tau_max > 0.0 ? run.config.tau_max : 10.0 / rate;
    if (tau_max > 50.0 / rate) {
        log << "survival: tau_max capped at 50/|Im mu| = " << format_double(50.0 / rate) << "\n";
        tau_max = 50.0 / rate;
    }
    const auto taus = linspace(0.0, tau_max, run.config.tau_points);
    const SpectralMeasure measure = spectral_measure(run.config.model, run.density);
    AmplitudeOptions opts;
    opts.refine_tol = run.config.refine_tol;
    for (const auto& row : compare_exponential(measure, pole, taus, opts))
        t.rows.push_back({row.tau, row.abs_A, row.exp_residue, row.deviation});
    return t;
}

struct GalileanResult {
    Table table;
    LimitScan scan;
    double kinetic_gap = 0.0;
};

GalileanResult galilean_result(const RunConfig& c) {
    GalileanResult out;
    out.table.columns = {"c", "residual"};
    out.scan = limit_scan(c.kinematics, c.c_values);
    for (std::size_t i = 0; i < out.scan.c.size(); ++i) out.table.rows.push_back({out.scan.c[i], out.scan.residual[i]});
    const auto variant = c.kinetic_variant == "as_printed" ? KineticVariant::as_printed : KineticVariant::decay_mass;
    out.kinetic_gap = galilean_kinetic_gap(c.kinematics, variant);
    return out;
}

void emit(const RunConfig& c, const std::string& name, const Table& t) {
    const fs::path dir(c.out_dir);
    if (c.format == "csv") {
        write_atomic(dir / (name + ".csv"), to_csv(t));
    } else {
        json j{{"config_hash", config_hash(c)}, {"columns", t.columns}, {"rows", to_json(t)}};
        write_atomic(dir / (name + ".json"), j.dump(1) + "\n");
    }
}

json config_json(const RunConfig& c) {
    json j = json::object();
    for (const auto& [sec, kv] : canonical_sections(c))
        for (const auto& [k, v] : kv) j[sec][k] = v;
    return j;
}

// runs one report section; failures are recorded rather than aborting the report
template <class F>
json section(const char* name, std::ostream& log, int& failures, F&& body) {
    try {
        return body();
    } catch (const std::exception& e) {
        ++failures;
        log << "report: " << name << " failed: " << e.what() << "\n";
        return json{{"error", e.what()}};
    }
}

void report(Run& run, std::ostream& log) {
    const RunConfig& c = run.config;
    int failures = 0;
    json j;
    j["config"] = config_json(c);
    j["config_hash"] = config_hash(c);
    j["density"] = section("density", log, failures, [&] { return json{{"rows", to_json(density_table(run))}}; });
    j["hfunc"] = section("hfunc", log, failures, [&] { return json{{"rows", to_json(hfunc_table(run))}}; });
    const bool continuable = run.density.continuation_available();
    const json skipped{{"skipped", pole_skip_reason(run.density)}};
    j["pole"] = continuable ? section("pole", log, failures, [&] { return json{{"rows", to_json(pole_table(run))}}; })
                            : skipped;
    j["smatrix"] = section("smatrix", log, failures, [&] {
        const auto r = smatrix_result(run, log);
        json f = json::object();
        for (const auto& [k, v] : r.summary) f[k] = v;
        return json{{"rows", to_json(r.table)}, {"factorization", f}, {"classification", r.classification}};
    });
    j["evolve"] = continuable
                      ? section("evolve", log, failures, [&] { return json{{"rows", to_json(evolve_table(run, log))}}; })
                      : skipped;
    j["survival"] =
        section("survival", log, failures, [&] { return json{{"rows", to_json(survival_table(run, log))}}; });
    j["galilean"] = section("galilean", log, failures, [&] {
        const auto g = galilean_result(c);
        return json{{"rows", to_json(g.table)},
                    {"slope", number(g.scan.slope)},
                    {"converged", g.scan.converged},
                    {"kinetic_gap", number(g.kinetic_gap)},
                    {"kinetic_variant", c.kinetic_variant}};
    });
    write_atomic(fs::path(c.out_dir) / "report.json", j.dump(1) + "\n");
    if (failures > 0) throw NumericalError(std::to_string(failures) + " report section(s) failed; see report.json");
}

}  // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"density", "hfunc",    "pole",     "smatrix",
                                                "evolve",  "survival", "galilean", "report"};
    return names;
}

void run_subcommand(const std::string& name, const RunConfig& config, std::ostream& log) {
    if (std::find(subcommands().begin(), subcommands().end(), name) == subcommands().end())
        throw ValidationError("unknown subcommand '" + name + "'");
    if (name == "galilean") {
        const auto g = galilean_result(config);
        emit(config, "galilean", g.table);
        if (g.scan.converged)
            log << "galilean: residuals below 1e-14, no slope fitted\n";
        else
            log << "galilean: slope " << format_double(g.scan.slope) << "\n";
        return;
    }
    Run run(config);
    if (name == "density") {
        emit(config, "density", density_table(run));
    } else if (name == "hfunc") {
        emit(config, "hfunc", hfunc_table(run));
    } else if (name == "pole") {
        emit(config, "pole", pole_table(run));
    } else if (name == "smatrix") {
        const auto r = smatrix_result(run, log);
        emit(config, "smatrix", r.table);
        if (config.format == "csv") {
            write_atomic(fs::path(config.out_dir) / "smatrix_factorization.csv", summary_csv(r.summary));
        } else {
            json f = json::object();
            for (const auto& [k, v] : r.summary) f[k] = v;
            write_atomic(fs::path(config.out_dir) / "smatrix_factorization.json", f.dump(1) + "\n");
        }
    } else if (name == "evolve") {
        emit(config, "evolve", evolve_table(run, log));
    } else if (name == "survival") {
        emit(config, "survival", survival_table(run, log));
    } else {
        report(run, log);
    }
}

}  // namespace lpres::cli
