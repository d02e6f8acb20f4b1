// ahe: renormalized volume and Weyl energy experiments on warped-product AHE metrics.
#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "ahe/ahe.hpp"
#include "ahe/report.hpp"

namespace {

int cmd_run(const std::string& config, const std::optional<std::string>& out, std::optional<double> tol_id,
            std::optional<double> tol_cons) {
    ahe::Scenario s = ahe::load_scenario(config);
    if (tol_id) s.tol.identities = *tol_id;
    if (tol_cons) s.tol.constraints = *tol_cons;
    auto res = ahe::run(s, out);
    std::cout << s.family;
    for (const auto& [k, v] : s.params) std::cout << " " << k << "=" << ahe::detail::format_real(v);
    std::cout << "\n";
    if (const auto it = res.report.find("renormalization"); it != res.report.end()) {
        std::printf("  V = %.12g   v0 = %.12g   v2 = %.12g\n", (*it)["V"].get<double>(), (*it)["v0"].get<double>(),
                    (*it)["v2"].get<double>());
        if (!(*it)["weyl_energy"].is_null())
            std::printf("  int|W|^2 = %.12g   W+ = %.12g   W- = %.12g\n", (*it)["weyl_energy"].get<double>(),
                        (*it)["weyl_plus"].get<double>(), (*it)["weyl_minus"].get<double>());
    }
    if (const auto it = res.report.find("variation"); it != res.report.end())
        std::printf("  dV = %.12g   dV_fd = %.12g   dW = %.12g   dEta = %.3g\n", (*it)["dV"].get<double>(),
                    (*it)["fd_oracles"]["dV"].get<double>(), (*it)["dW"].get<double>(), (*it)["dEta"].get<double>());
    ahe::print_checks(std::cout, res.checks);
    std::string dir = out.value_or(s.output_dir);
    for (const auto& f : res.files) std::cout << "  wrote " << dir << "/" << f << "\n";
    std::cout << (res.pass() ? "status: pass" : "status: fail") << "\n";
    return res.pass() ? 0 : 1;
}

int cmd_suite(const std::string& name) {
    auto rows = ahe::run_suite(name, &std::cout);
    int failed = 0;
    for (const auto& r : rows) failed += !r.pass;
    std::cout << rows.size() - failed << "/" << rows.size() << " passed\n";
    return failed ? 1 : 0;
}

int cmd_families() {
    for (const auto& f : ahe::families()) {
        std::cout << f.name << "\n  params: " << (f.params.empty() ? "none" : f.params) << "\n  " << f.description << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"renormalized volume, Weyl energy and their variations for AHE metrics"};
    app.require_subcommand(1);

    std::string config;
    std::optional<std::string> out;
    std::optional<double> tol_id, tol_cons;
    auto* run = app.add_subcommand("run", "run a scenario config and write the JSON report");
    run->add_option("config", config, "scenario JSON")->required();
    run->add_option("--out", out, "output directory (overrides output.dir)");
    run->add_option("--tol-identities", tol_id, "tolerance for identity residuals");
    run->add_option("--tol-constraints", tol_cons, "tolerance for FG constraint residuals");

    std::string suite_name;
    auto* suite = app.add_subcommand("suite", "run an acceptance battery over the built-in families");
    suite->add_option("name", suite_name, "identities | constraints | variations")
        ->required()
        ->check(CLI::IsMember(ahe::suite_names()));

    auto* fams = app.add_subcommand("families", "list built-in families and their parameters");

    CLI11_PARSE(app, argc, argv);
    try {
        if (run->parsed()) return cmd_run(config, out, tol_id, tol_cons);
        if (suite->parsed()) return cmd_suite(suite_name);
        if (fams->parsed()) return cmd_families();
    } catch (const ahe::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ahe::Error& e) {
        std::cerr << "error [" << e.module() << "]: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
