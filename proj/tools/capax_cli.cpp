// capax: batch front-end for the capacity pipelines.
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "capax/errors.hpp"
#include "capax/report.hpp"

int main(int argc, char** argv)
{
    using namespace capax;
    CLI::App app{"Symplectic capacities of ellipsoids: spectrum, orbits, capacities, verify, morse, axioms"};
    app.require_subcommand(1, 1);

    std::string configPath;
    std::string domain, domain2, format, out;
    int K = 0, grid = 0, kmax = 0, forcingMode = 0;
    double tol = 0, slope = 0, width = 0, eps = 0, forcingAmp = 0;
    unsigned long long seed = 0;
    std::vector<double> scalings;

    std::vector<CLI::Option*> opts;
    auto add = [&](CLI::App* sub) {
        sub->add_option("--config", configPath, "JSON config; flags override it");
        opts = {
            sub->add_option("--domain", domain, "domain JSON file {\"type\":\"ellipsoid\",\"a\":[...]}"),
            sub->add_option("--domain2", domain2, "outer domain for axioms"),
            sub->add_option("--K", K, "Fourier truncation (0 = automatic)"),
            sub->add_option("--grid", grid, "quadrature points per period (0 = 4K)"),
            sub->add_option("--kmax", kmax, "number of capacities"),
            sub->add_option("--tol", tol, "relative tolerance"),
            sub->add_option("--slope", slope, "slope override (0 = automatic)"),
            sub->add_option("--seed", seed, "random seed"),
            sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"})),
            sub->add_option("--out", out, "output file (default stdout)"),
            sub->add_option("--width", width, "collar width of the admissible profile"),
            sub->add_option("--eps", eps, "C^2 bound of the admissible profile (0 = 2 width)"),
            sub->add_option("--forcing-amp", forcingAmp, "amplitude of a time-dependent forcing term"),
            sub->add_option("--forcing-mode", forcingMode, "Fourier mode of the forcing term on the first axis (0: all modes, all axes)"),
            sub->add_option("--scalings", scalings, "conformality factors for axioms"),
        };
    };
    const std::pair<const char*, const char*> commands[] = {
        {"spectrum", "sorted action spectrum m*a_i below the slope, with labels"},
        {"orbits", "1-periodic orbits of the admissible profile with indices"},
        {"capacities", "EH and GH capacity sequences side by side"},
        {"verify", "check c_k(EH) = c_k(GH) to --tol; exit 1 on FAIL"},
        {"morse", "filtered Morse complex and homology ranks"},
        {"axioms", "monotonicity against --domain2 and conformality under --scalings"},
    };
    for (const auto& [name, what] : commands) add(app.add_subcommand(name, what));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    RunConfig cfg;
    CLI::App* sub = app.get_subcommands().front();
    cfg.command = sub->get_name();
    auto fail = [](const std::string& reason) {
        std::cerr << "error: kind=input reason=" << nlohmann::json(reason).dump() << "\n";
        return 2;
    };
    if (!configPath.empty()) {
        std::ifstream in(configPath);
        if (!in) return fail("cannot open config " + configPath);
        try {
            nlohmann::json j;
            in >> j;
            apply_config(cfg, j);
            cfg.command = sub->get_name();
        } catch (const std::exception& e) {
            return fail(e.what());
        }
    }
    auto given = [&](const char* flag) { return sub->get_option(flag)->count() > 0; };
    if (given("--domain")) cfg.domain = domain;
    if (given("--domain2")) cfg.domain2 = domain2;
    if (given("--K")) cfg.K = K;
    if (given("--grid")) cfg.m = grid;
    if (given("--kmax")) cfg.kmax = kmax;
    if (given("--tol")) cfg.tol = tol;
    if (given("--slope")) cfg.slope = slope;
    if (given("--seed")) cfg.seed = seed;
    if (given("--format")) cfg.format = format == "json" ? Format::json : Format::csv;
    if (given("--out")) cfg.out = out;
    if (given("--width")) cfg.width = width;
    if (given("--eps")) cfg.eps = eps;
    if (given("--forcing-amp")) cfg.forcingAmp = forcingAmp;
    if (given("--forcing-mode")) cfg.forcingMode = forcingMode;
    if (given("--scalings")) cfg.scalings = scalings;

    const RunOutcome r = run(cfg);
    if (!r.error.empty()) std::cerr << r.error << "\n";
    if (!r.report.empty()) {
        if (cfg.out.empty()) {
            std::cout << r.report;
        } else {
            std::ofstream f(cfg.out, std::ios::binary);
            if (!f) return fail("cannot write " + cfg.out);
            f << r.report;
        }
    }
    return r.exitCode;
}
