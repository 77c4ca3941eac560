#include <doctest.h>

#include "lpres/cli.hpp"
#include "lpres/errors.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

using namespace lpres;
namespace fs = std::filesystem;

namespace {

const char* flat_ini = "[model]\nomega_V = 1\ng = 0.2\n[density]\nvariant = flat\ngamma_total = 0.2\n";

std::string error_of(const std::string& text) {
    try {
        cli::parse_config(text);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return {};
}

struct Scratch {
    fs::path dir;
    Scratch() {
        dir = fs::temp_directory_path() / ("lpres_cli_test_" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    fs::path write(const std::string& name, const std::string& text) const {
        std::ofstream(dir / name) << text;
        return dir / name;
    }
};

int run_cli(const std::string& args) {
    const std::string cmd = std::string(LPRES_CLI_PATH) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

std::vector<std::vector<double>> csv_rows(const fs::path& p, std::string* header = nullptr) {
    std::ifstream f(p);
    std::string line;
    std::getline(f, line);
    if (header) *header = line;
    std::vector<std::vector<double>> rows;
    while (std::getline(f, line)) {
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

std::map<std::string, std::string> summary(const fs::path& p) {
    std::ifstream f(p);
    std::string line;
    std::getline(f, line);
    std::map<std::string, std::string> kv;
    while (std::getline(f, line)) {
        const auto c = line.find(',');
        kv[line.substr(0, c)] = line.substr(c + 1);
    }
    return kv;
}

}  // namespace

TEST_CASE("minimal config takes the documented defaults") {
    const auto c = cli::parse_config("[model]\nomega_V=1\ng=0.2\n[density]\nvariant=flat\ngamma_total=0.2\n");
    CHECK(c.N == 16384);
    CHECK(c.Omega == 20.0);
    CHECK(c.model.g == 0.2);
    CHECK(c.density.gamma_total == 0.2);
    CHECK(c.pole_options.tol_h == 1e-12);
    CHECK(c.refine_tol == 1e-7);
    CHECK(c.format == "csv");
}

TEST_CASE("config errors") {
    CHECK(error_of("[model]\nomega_V=1\n[density]\nvariant=flat\n").find("gamma_total") != std::string::npos);
    CHECK(error_of(std::string(flat_ini) + "[grid]\nN=1000\n").find("N must be a power of two") != std::string::npos);
    CHECK(error_of(std::string(flat_ini) + "[grid]\nNN=1024\n").find("unknown key NN") != std::string::npos);
    CHECK(error_of(std::string(flat_ini) + "[plot]\nx=1\n").find("unknown section") != std::string::npos);
    CHECK(error_of("[model]\nomega_V=1\nbroken line\n").find("line 3") != std::string::npos);
    CHECK(error_of("[model]\nomega_V=abc\n[density]\nvariant=flat\ngamma_total=0.2\n").find("omega_V") !=
          std::string::npos);
    CHECK(error_of("[model]\nM_V=-1\n[density]\nvariant=flat\ngamma_total=0.2\n").find("nonpositive mass") !=
          std::string::npos);
    CHECK(error_of("[model]\ng=0.2\n[density]\nvariant=lorentzian\nlambda0=1\n").find("gamma") != std::string::npos);
    CHECK(error_of("[model]\ng=0.2\n[density]\nvariant=tabulated\nlambdas=0,0,1\nvalues=0,1,0\n")
              .find("unsorted table") != std::string::npos);
}

TEST_CASE("config hash") {
    const auto a = cli::parse_config(flat_ini);
    const auto b = cli::parse_config(std::string("; comment\n") + flat_ini + "[output]\ndirectory=elsewhere\n");
    CHECK(cli::config_hash(a) == cli::config_hash(b));
    CHECK(cli::config_hash(a).size() == 16);
    const auto c = cli::parse_config("[model]\nomega_V=1\ng=0.2\n[density]\nvariant=flat\ngamma_total=0.21\n");
    CHECK(cli::config_hash(a) != cli::config_hash(c));
    const auto re = cli::config_from_sections(cli::canonical_sections(a));
    CHECK(cli::config_hash(re) == cli::config_hash(a));
}

TEST_CASE("pole subcommand on the flat band") {
    Scratch s;
    const auto cfg = s.write("flat.ini", flat_ini);
    REQUIRE(run_cli("pole --config " + cfg.string() + " --out " + (s.dir / "out").string()) == 0);
    std::string header;
    const auto rows = csv_rows(s.dir / "out" / "pole.csv", &header);
    CHECK(header == "re_mu,im_mu,re_residue,im_residue,iterations");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0][0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rows[0][1] == doctest::Approx(-0.1).epsilon(1e-12));
    CHECK(rows[0][2] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(rows[0][3]) < 1e-12);
    CHECK(rows[0][4] <= 3.0);
}

TEST_CASE("smatrix subcommand with g = 0") {
    Scratch s;
    const auto cfg = s.write("free.ini", "[model]\ng=0\n[density]\nvariant=flat\ngamma_total=0.2\n");
    REQUIRE(run_cli("smatrix --config " + cfg.string() + " --out " + s.dir.string()) == 0);
    std::string header;
    const auto rows = csv_rows(s.dir / "smatrix.csv", &header);
    CHECK(header == "sigma,re_s,im_s,abs_s,unwrapped_phase");
    CHECK(rows.size() == 1001);
    for (const auto& r : rows) {
        CHECK(r[3] == 1.0);
        CHECK(r[4] == 0.0);
    }
    const auto kv = summary(s.dir / "smatrix_factorization.csv");
    CHECK(kv.at("winding_number") == "0");
    CHECK(kv.at("trivial") == "1");
}

TEST_CASE("survival subcommand on the flat band") {
    Scratch s;
    const auto cfg = s.write("flat.ini", flat_ini);
    REQUIRE(run_cli("survival --config " + cfg.string() + " --out " + s.dir.string()) == 0);
    std::string header;
    const auto rows = csv_rows(s.dir / "survival.csv", &header);
    CHECK(header == "tau,abs_A,exp_model,deviation");
    CHECK(rows.size() == 51);
    for (const auto& r : rows) CHECK(r[3] < 1e-6);
}

TEST_CASE("headers of the remaining subcommands") {
    Scratch s;
    const auto cfg = s.write("flat.ini", std::string(flat_ini) + "[grid]\nN=4096\npoints=101\n");
    const std::vector<std::pair<std::string, std::string>> expect{
        {"density", "lambda,rho"},
        {"hfunc", "sigma,re_h_plus,im_h_plus"},
        {"evolve", "tau,norm_ratio,eigen_error"},
        {"galilean", "c,residual"}};
    for (const auto& [name, header] : expect) {
        REQUIRE(run_cli(name + " --config " + cfg.string() + " --out " + s.dir.string()) == 0);
        std::string h;
        csv_rows(s.dir / (name + ".csv"), &h);
        CHECK(h == header);
    }
    const std::string csv = slurp(s.dir / "density.csv");
    CHECK(csv.find('\r') == std::string::npos);
    CHECK(csv.find("0.031830988618379068") != std::string::npos);
}

TEST_CASE("exit codes") {
    Scratch s;
    const auto bad = s.write("bad.ini", "[model]\ng=0.2\n[density]\nvariant=flat\n[grid]\nN=1000\n");
    CHECK(run_cli("pole --config " + bad.string() + " --out " + s.dir.string()) == 1);
    CHECK(run_cli("pole --config " + (s.dir / "missing.ini").string()) == 1);
    CHECK(run_cli("nonsense --config x") == 1);
    // a decoupled level is a bound state: the continuum measure is incomplete
    const auto free = s.write("free.ini", "[model]\ng=0\n[density]\nvariant=flat\ngamma_total=0.2\n");
    CHECK(run_cli("survival --config " + free.string() + " --out " + s.dir.string()) == 2);
}

TEST_CASE("report round trip and JSON output") {
    Scratch s;
    const auto cfg = s.write("flat.ini", std::string(flat_ini) + "[grid]\nN=4096\npoints=101\n");
    REQUIRE(run_cli("report --config " + cfg.string() + " --out " + (s.dir / "a").string()) == 0);
    const auto first = nlohmann::json::parse(slurp(s.dir / "a" / "report.json"));
    CHECK(first["config_hash"] == cli::config_hash(cli::load_config_file(cfg.string())));
    CHECK(first["smatrix"]["classification"] == "inner_rational");
    CHECK(first["pole"]["rows"].size() == 1);
    CHECK(first["pole"]["rows"][0].contains("re_mu"));
    REQUIRE(run_cli("report --config " + (s.dir / "a" / "report.json").string() + " --out " + (s.dir / "b").string()) ==
            0);
    const auto second = nlohmann::json::parse(slurp(s.dir / "b" / "report.json"));
    CHECK(second["config_hash"] == first["config_hash"]);
    CHECK(slurp(s.dir / "a" / "report.json") == slurp(s.dir / "b" / "report.json"));

    REQUIRE(run_cli("pole --config " + cfg.string() + " --out " + s.dir.string() + " --format json") == 0);
    const auto pj = nlohmann::json::parse(slurp(s.dir / "pole.json"));
    CHECK(pj["columns"].size() == 5);
    CHECK(pj["rows"][0]["im_mu"].get<double>() == doctest::Approx(-0.1));
}

TEST_CASE("thread count does not change the output") {
    Scratch s;
    const auto cfg = s.write("gau.ini", "[model]\ng=0.2\n[density]\nvariant=gaussian\nlambda0=1\nwidth=1\n[grid]\npoints=201\n");
    REQUIRE(run_cli("hfunc --config " + cfg.string() + " --out " + (s.dir / "one").string()) == 0);
    const std::string one = slurp(s.dir / "one" / "hfunc.csv");
    const std::string cmd = "LPRES_THREADS=3 " + std::string(LPRES_CLI_PATH) + " hfunc --config " + cfg.string() +
                            " --out " + (s.dir / "three").string() + " 2>/dev/null";
    REQUIRE(std::system(cmd.c_str()) == 0);
    CHECK(one == slurp(s.dir / "three" / "hfunc.csv"));
    const std::string bad = "LPRES_THREADS=0 " + std::string(LPRES_CLI_PATH) + " hfunc --config " + cfg.string() +
                            " --out " + s.dir.string() + " 2>/dev/null";
    const int st = std::system(bad.c_str());
    CHECK(WEXITSTATUS(st) == 1);
}
