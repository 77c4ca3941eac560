#include "lpres/cli.hpp"
#include "lpres/errors.hpp"
#include "lpres/foliation.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace lpres::cli {

namespace {

const std::map<std::string, std::set<std::string>>& allowed_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"model", {"M_V", "M_N", "M_theta", "omega_V", "g", "p_t", "p_x"}},
        {"density",
         {"variant", "gamma_total", "lambda0", "gamma", "width", "lambdas", "values", "profile_amplitude",
          "profile_center", "profile_width", "envelope_scale", "signature", "lambda_min", "lambda_max",
          "table_points"}},
        {"grid", {"N", "Omega", "sigma_min", "sigma_max", "points"}},
        {"pole", {"re_min", "re_max", "im_min", "im_max", "seeds_re", "seeds_im"}},
        {"aux", {"u"}},
        {"evolve", {"taus"}},
        {"survival", {"tau_max", "tau_points"}},
        {"galilean",
         {"p", "k", "M_V", "M_N", "M_theta", "eps_V", "eps_N", "eps_theta", "c_values", "variant"}},
        {"tolerances", {"tol_h", "tol_step", "max_iterations", "stagnation_limit", "dedup_radius", "refine_tol"}},
        {"output", {"directory", "format"}},
    };
    return keys;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

class Reader {
public:
    explicit Reader(const Sections& s) : sections_(s) {}

    const std::string* find(const std::string& sec, const std::string& key) const
    {
        auto it = sections_.find(sec);
        if (it == sections_.end()) return nullptr;
        auto kt = it->second.find(key);
        return kt == it->second.end() ? nullptr : &kt->second;
    }

    std::string require_raw(const std::string& sec, const std::string& key) const
    {
        const std::string* v = find(sec, key);
        if (!v) throw ValidationError("missing key " + key + " in [" + sec + "]");
        return *v;
    }

    static double to_double(const std::string& sec, const std::string& key, const std::string& raw)
    {
        const std::string t = trim(raw);
        std::size_t pos = 0;
        double x = 0.0;
        try {
            x = std::stod(t, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (t.empty() || pos != t.size() || !std::isfinite(x))
            throw ValidationError("bad number for " + key + " in [" + sec + "]: '" + raw + "'");
        return x;
    }

    void real(const std::string& sec, const std::string& key, double& out) const
    {
        if (const std::string* v = find(sec, key)) out = to_double(sec, key, *v);
    }
    double required_real(const std::string& sec, const std::string& key) const
    {
        return to_double(sec, key, require_raw(sec, key));
    }

    template <class Int>
    void integer(const std::string& sec, const std::string& key, Int& out) const
    {
        const std::string* v = find(sec, key);
        if (!v) return;
        const std::string t = trim(*v);
        std::size_t pos = 0;
        long long x = 0;
        try {
            x = std::stoll(t, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (t.empty() || pos != t.size())
            throw ValidationError("bad integer for " + key + " in [" + sec + "]: '" + *v + "'");
        if (x < 0) throw ValidationError(key + " in [" + sec + "] must be nonnegative");
        out = static_cast<Int>(x);
    }

    void list(const std::string& sec, const std::string& key, std::vector<double>& out) const
    {
        const std::string* v = find(sec, key);
        if (!v) return;
        out.clear();
        std::stringstream ss(*v);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(to_double(sec, key, item));
    }

    void text(const std::string& sec, const std::string& key, std::string& out) const
    {
        if (const std::string* v = find(sec, key)) out = trim(*v);
    }

private:
    const Sections& sections_;
};

Vec3 to_vec3(const std::vector<double>& v, const std::string& key) {
    if (v.size() != 3) throw ValidationError(key + " in [galilean] needs three components");
    return {v[0], v[1], v[2]};
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += format_double(v[i]);
    }
    return out;
}

bool power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

}  // namespace

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

RunConfig config_from_sections(const Sections& sections) {
    for (const auto& [sec, kv] : sections) {
        auto it = allowed_keys().find(sec);
        if (it == allowed_keys().end()) throw ValidationError("unknown section [" + sec + "]");
        for (const auto& [key, value] : kv)
            if (!it->second.count(key)) throw ValidationError("unknown key " + key + " in [" + sec + "]");
    }

    Reader r(sections);
    RunConfig c;

    ModelParameters& m = c.model;
    r.real("model", "M_V", m.M_V);
    r.real("model", "M_N", m.M_N);
    r.real("model", "M_theta", m.M_theta);
    r.real("model", "omega_V", m.omega_V);
    r.real("model", "g", m.g);
    r.real("model", "p_t", m.p_t);
    r.real("model", "p_x", m.p_x);

    DensitySpec& d = c.density;
    d.variant = trim(r.require_raw("density", "variant"));
    if (d.variant == "flat") {
        d.gamma_total = r.required_real("density", "gamma_total");
    } else if (d.variant == "lorentzian") {
        d.lambda0 = r.required_real("density", "lambda0");
        d.gamma = r.required_real("density", "gamma");
    } else if (d.variant == "gaussian") {
        d.lambda0 = r.required_real("density", "lambda0");
        d.width = r.required_real("density", "width");
    } else if (d.variant == "tabulated") {
        r.require_raw("density", "lambdas");
        r.require_raw("density", "values");
        r.list("density", "lambdas", d.lambdas);
        r.list("density", "values", d.values);
    } else if (d.variant == "form_factor") {
        r.real("density", "profile_amplitude", d.profile_amplitude);
        r.real("density", "profile_center", d.profile_center);
        r.real("density", "profile_width", d.profile_width);
        r.real("density", "envelope_scale", d.envelope_scale);
        r.text("density", "signature", d.signature);
        r.real("density", "lambda_min", d.lambda_min);
        r.real("density", "lambda_max", d.lambda_max);
        r.integer("density", "table_points", d.table_points);
        if (d.signature != "minkowski" && d.signature != "euclidean")
            throw ValidationError("signature must be minkowski or euclidean");
        if (!(d.lambda_max > d.lambda_min)) throw ValidationError("lambda_max must exceed lambda_min");
        if (d.table_points < 2) throw ValidationError("table_points must be at least 2");
    } else {
        throw ValidationError("unknown density variant '" + d.variant + "'");
    }

    r.integer("grid", "N", c.N);
    r.real("grid", "Omega", c.Omega);
    r.real("grid", "sigma_min", c.sigma_min);
    r.real("grid", "sigma_max", c.sigma_max);
    r.integer("grid", "points", c.points);
    if (!power_of_two(c.N)) throw ValidationError("N must be a power of two");
    if (!(c.Omega > 0.0)) throw ValidationError("Omega must be positive");
    if (!(c.sigma_max > c.sigma_min)) throw ValidationError("sigma_max must exceed sigma_min");
    if (c.points < 2) throw ValidationError("points must be at least 2");

    r.real("pole", "re_min", c.pole_rect.re_min);
    r.real("pole", "re_max", c.pole_rect.re_max);
    r.real("pole", "im_min", c.pole_rect.im_min);
    r.real("pole", "im_max", c.pole_rect.im_max);
    r.integer("pole", "seeds_re", c.seeds_re);
    r.integer("pole", "seeds_im", c.seeds_im);
    if (!(c.pole_rect.re_max > c.pole_rect.re_min) || !(c.pole_rect.im_max > c.pole_rect.im_min))
        throw ValidationError("empty pole rectangle");
    if (c.pole_rect.im_max > 0.0) throw ValidationError("pole rectangle must lie in Im z <= 0");
    if (c.seeds_re < 1 || c.seeds_im < 1) throw ValidationError("seed counts must be positive");

    r.list("aux", "u", c.aux_u);
    if (c.aux_u.empty()) throw ValidationError("u in [aux] is empty");
    double un = 0.0;
    for (double x : c.aux_u) un += x * x;
    if (!(un > 0.0)) throw ValidationError("u in [aux] must be nonzero");

    r.list("evolve", "taus", c.evolve_taus);
    for (double t : c.evolve_taus)
        if (t < 0.0) throw ValidationError("negative tau in [evolve]");

    r.real("survival", "tau_max", c.tau_max);
    r.integer("survival", "tau_points", c.tau_points);
    if (c.tau_max < 0.0) throw ValidationError("tau_max must be nonnegative");
    if (c.tau_points < 2) throw ValidationError("tau_points must be at least 2");

    KinematicConfig& k = c.kinematics;
    k.p_vec = {0.3, 0.0, 0.0};
    k.k_vec = {1.0, 0.2, 0.0};
    k.eps_V = 0.3;
    k.eps_N = 0.1;
    k.eps_theta = 0.2;
    std::vector<double> pv(k.p_vec.begin(), k.p_vec.end()), kv(k.k_vec.begin(), k.k_vec.end());
    r.list("galilean", "p", pv);
    r.list("galilean", "k", kv);
    k.p_vec = to_vec3(pv, "p");
    k.k_vec = to_vec3(kv, "k");
    r.real("galilean", "M_V", k.M_V);
    r.real("galilean", "M_N", k.M_N);
    r.real("galilean", "M_theta", k.M_theta);
    r.real("galilean", "eps_V", k.eps_V);
    r.real("galilean", "eps_N", k.eps_N);
    r.real("galilean", "eps_theta", k.eps_theta);
    r.list("galilean", "c_values", c.c_values);
    r.text("galilean", "variant", c.kinetic_variant);
    if (c.kinetic_variant != "decay_mass" && c.kinetic_variant != "as_printed")
        throw ValidationError("variant in [galilean] must be decay_mass or as_printed");
    if (c.c_values.empty()) throw ValidationError("c_values in [galilean] is empty");
    for (double cv : c.c_values)
        if (!(cv > 0.0)) throw ValidationError("c_values must be positive");
    validate(k);

    r.real("tolerances", "tol_h", c.pole_options.tol_h);
    r.real("tolerances", "tol_step", c.pole_options.tol_step);
    r.integer("tolerances", "max_iterations", c.pole_options.max_iterations);
    r.integer("tolerances", "stagnation_limit", c.pole_options.stagnation_limit);
    r.real("tolerances", "dedup_radius", c.dedup_radius);
    r.real("tolerances", "refine_tol", c.refine_tol);
    if (!(c.pole_options.tol_h > 0.0) || !(c.pole_options.tol_step > 0.0) || !(c.dedup_radius > 0.0) ||
        !(c.refine_tol > 0.0))
        throw ValidationError("tolerances must be positive");
    if (c.pole_options.max_iterations < 1) throw ValidationError("max_iterations must be positive");

    r.text("output", "directory", c.out_dir);
    r.text("output", "format", c.format);
    if (c.format != "csv" && c.format != "json") throw ValidationError("format must be csv or json");

    validate(c.model, make_density(c));
    return c;
}

RunConfig parse_config(const std::string& text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ValidationError("config line " + std::to_string(e.line()) + ": " + e.message());
    }
    Sections sections;
    for (const auto& [name, sec] : tree) {
        if (sec.empty() && !sec.data().empty())
            throw ValidationError("key " + name + " outside any section");
        auto& out = sections[name];
        for (const auto& [key, value] : sec) out[key] = value.data();
    }
    return config_from_sections(sections);
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot read config " + path);
    std::stringstream buf;
    buf << f.rdbuf();
    const std::string text = buf.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError(std::string("report JSON: ") + e.what());
        }
        if (!j.contains("config") || !j["config"].is_object())
            throw ValidationError("report JSON has no config object");
        Sections sections;
        for (const auto& [sec, kv] : j["config"].items()) {
            if (!kv.is_object()) throw ValidationError("config section " + sec + " is not an object");
            for (const auto& [key, value] : kv.items()) {
                if (!value.is_string()) throw ValidationError("config value " + sec + "." + key + " is not a string");
                sections[sec][key] = value.get<std::string>();
            }
        }
        return config_from_sections(sections);
    }
    return parse_config(text);
}

Sections canonical_sections(const RunConfig& c) {
    Sections s;
    const auto& m = c.model;
    s["model"] = {{"M_V", format_double(m.M_V)},     {"M_N", format_double(m.M_N)},
                  {"M_theta", format_double(m.M_theta)}, {"omega_V", format_double(m.omega_V)},
                  {"g", format_double(m.g)},         {"p_t", format_double(m.p_t)},
                  {"p_x", format_double(m.p_x)}};
    const auto& d = c.density;
    auto& ds = s["density"];
    ds["variant"] = d.variant;
    if (d.variant == "flat") {
        ds["gamma_total"] = format_double(d.gamma_total);
    } else if (d.variant == "lorentzian") {
        ds["lambda0"] = format_double(d.lambda0);
        ds["gamma"] = format_double(d.gamma);
    } else if (d.variant == "gaussian") {
        ds["lambda0"] = format_double(d.lambda0);
        ds["width"] = format_double(d.width);
    } else if (d.variant == "tabulated") {
        ds["lambdas"] = join(d.lambdas);
        ds["values"] = join(d.values);
    } else {
        ds["profile_amplitude"] = format_double(d.profile_amplitude);
        ds["profile_center"] = format_double(d.profile_center);
        ds["profile_width"] = format_double(d.profile_width);
        ds["envelope_scale"] = format_double(d.envelope_scale);
        ds["signature"] = d.signature;
        ds["lambda_min"] = format_double(d.lambda_min);
        ds["lambda_max"] = format_double(d.lambda_max);
        ds["table_points"] = std::to_string(d.table_points);
    }
    s["grid"] = {{"N", std::to_string(c.N)},
                 {"Omega", format_double(c.Omega)},
                 {"sigma_min", format_double(c.sigma_min)},
                 {"sigma_max", format_double(c.sigma_max)},
                 {"points", std::to_string(c.points)}};
    s["pole"] = {{"re_min", format_double(c.pole_rect.re_min)}, {"re_max", format_double(c.pole_rect.re_max)},
                 {"im_min", format_double(c.pole_rect.im_min)}, {"im_max", format_double(c.pole_rect.im_max)},
                 {"seeds_re", std::to_string(c.seeds_re)},     {"seeds_im", std::to_string(c.seeds_im)}};
    s["aux"] = {{"u", join(c.aux_u)}};
    s["evolve"] = {{"taus", join(c.evolve_taus)}};
    s["survival"] = {{"tau_max", format_double(c.tau_max)}, {"tau_points", std::to_string(c.tau_points)}};
    const auto& k = c.kinematics;
    s["galilean"] = {{"p", join({k.p_vec.begin(), k.p_vec.end()})},
                     {"k", join({k.k_vec.begin(), k.k_vec.end()})},
                     {"M_V", format_double(k.M_V)},
                     {"M_N", format_double(k.M_N)},
                     {"M_theta", format_double(k.M_theta)},
                     {"eps_V", format_double(k.eps_V)},
                     {"eps_N", format_double(k.eps_N)},
                     {"eps_theta", format_double(k.eps_theta)},
                     {"c_values", join(c.c_values)},
                     {"variant", c.kinetic_variant}};
    s["tolerances"] = {{"tol_h", format_double(c.pole_options.tol_h)},
                       {"tol_step", format_double(c.pole_options.tol_step)},
                       {"max_iterations", std::to_string(c.pole_options.max_iterations)},
                       {"stagnation_limit", std::to_string(c.pole_options.stagnation_limit)},
                       {"dedup_radius", format_double(c.dedup_radius)},
                       {"refine_tol", format_double(c.refine_tol)}};
    // output location is not part of the physics and is excluded from the hash
    return s;
}

std::string config_hash(const RunConfig& c) {
    std::uint64_t h = 14695981039346656037ull;
    auto feed = [&h](const std::string& text) {
        for (unsigned char ch : text) {
            h ^= ch;
            h *= 1099511628211ull;
        }
    };
    for (const auto& [sec, kv] : canonical_sections(c))
        for (const auto& [key, value] : kv) feed(sec + "." + key + "=" + value + "\n");
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

SpectralDensity make_density(const RunConfig& c) {
    const auto& d = c.density;
    const double g2 = c.model.g * c.model.g;
    if (d.variant == "flat") return SpectralDensity::flat(d.gamma_total);
    if (d.variant == "lorentzian") return SpectralDensity::lorentzian(d.lambda0, d.gamma, g2);
    if (d.variant == "gaussian") return SpectralDensity::gaussian(d.lambda0, d.width, g2);
    if (d.variant == "tabulated") return SpectralDensity::tabulated(d.lambdas, d.values);

    FormFactorProfile profile;
    const double amp = d.profile_amplitude, mid = d.profile_center, w = d.profile_width;
    profile.g_profile = [amp, mid, w](double lambda) {
        const double x = (lambda - mid) / w;
        return amp * std::exp(-0.5 * x * x);
    };
    profile.u = {cplx(1.0, 0.0)};
    profile.envelope_scale = d.envelope_scale;
    profile.signature = d.signature == "euclidean" ? Signature::euclidean : Signature::minkowski;
    std::vector<double> grid(d.table_points);
    for (std::size_t i = 0; i < grid.size(); ++i)
        grid[i] = d.lambda_min + (d.lambda_max - d.lambda_min) * static_cast<double>(i) /
                                     static_cast<double>(grid.size() - 1);
    return SpectralDensity::from_form_factor(profile, c.model, std::move(grid));
}

}  // namespace lpres::cli
