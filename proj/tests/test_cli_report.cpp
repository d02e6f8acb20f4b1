#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ahe/report.hpp"

using namespace ahe;
namespace fs = std::filesystem;

namespace {

const double pi2 = std::numbers::pi * std::numbers::pi;

fs::path scratch_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("ahe_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string config_error_path(const std::string& text) {
    try {
        parse_scenario(Json::parse(text));
    } catch (const ConfigError& e) {
        return e.key_path();
    }
    return "<none>";
}

Json small_hyperbolic() {
    return Json::parse(R"J({"family": "hyperbolic", "grid": {"resolution": [8, 8, 8]},
                           "tasks": ["identities", "volume", "weyl"], "output": {"csv": true}})J");
}

int run_cli(const std::string& args, const fs::path& log) {
    std::string cmd = std::string(AHE_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(CliReport, ConfigErrorsNameTheKey) {
    EXPECT_EQ(config_error_path(R"J({"tasks": ["volume"]})J"), "family");
    EXPECT_EQ(config_error_path(R"J({"family": "hyperbolic", "tasks": ["volume", "flux"]})J"), "tasks[1]");
    EXPECT_EQ(config_error_path(R"J({"family": "hyperbolic", "tasks": ["volume"], "grid": {"resolution": [8, 4, 8]}})J"),
              "grid.resolution[1]");
    EXPECT_EQ(config_error_path(R"J({"family": "hyperbolic", "tasks": ["volume"], "colour": 1})J"), "colour");
    EXPECT_EQ(config_error_path(R"J({"family": "ads_schwarzschild", "params": {"m": 1}, "tasks": ["variation"],
                                    "variation": {"parameter": "L"}})J"),
              "variation.parameter");
    const std::string no_chi = R"J({"family": "custom", "params": {"L": 1}, "tasks": ["identities"],
                                   "custom": {"u": "1", "blocks": [{"symbol": "T3", "profile": "exp(2*r)"}]}})J";
    EXPECT_EQ(config_error_path(no_chi), "topology_invariants.chi");
    const std::string bad_symbol = R"J({"family": "custom", "tasks": ["volume"],
                                       "custom": {"u": "1", "blocks": [{"symbol": "S5", "profile": "r"}]}})J";
    EXPECT_EQ(config_error_path(bad_symbol), "custom.blocks[0].symbol");
    EXPECT_EQ(config_error_path("[1, 2]"), "<root>");
}

TEST(CliReport, ParsedScenarioDefaults) {
    auto s = parse_scenario(small_hyperbolic());
    EXPECT_EQ(s.family, "hyperbolic");
    // tasks are kept in canonical order
    EXPECT_EQ(s.tasks, (std::vector<std::string>{"volume", "weyl", "identities"}));
    EXPECT_TRUE(s.has("weyl"));
    EXPECT_FALSE(s.has("fg"));
    EXPECT_EQ(s.report_name, "report.json");
    EXPECT_DOUBLE_EQ(s.tol.identities, 1e-4);
}

TEST(CliReport, NumberFormatting) {
    EXPECT_EQ(detail::format_real(1), "1.0");
    EXPECT_EQ(detail::format_real(0.1), "0.10000000000000001");
    EXPECT_EQ(detail::format_real(1e300), "1.0000000000000001e+300");
    EXPECT_EQ(detail::format_real(std::nan("")), "null");
    EXPECT_EQ(detail::format_real(-INFINITY), "null");
    Json j;
    j["a"] = Json::array({1, 2.5});
    j["b"] = std::nan("");
    EXPECT_EQ(to_json_text(j), "{\n  \"a\": [1, 2.5],\n  \"b\": null\n}\n");
}

TEST(CliReport, RunIsDeterministic) {
    auto s = parse_scenario(small_hyperbolic());
    auto d1 = scratch_dir("det1"), d2 = scratch_dir("det2");
    auto r1 = run(s, d1.string());
    auto r2 = run(s, d2.string());
    EXPECT_TRUE(r1.pass());
    EXPECT_EQ(slurp(d1 / "report.json"), slurp(d2 / "report.json"));
    EXPECT_EQ(slurp(d1 / "volume_profile.csv"), slurp(d2 / "volume_profile.csv"));
    auto rep = Json::parse(slurp(d1 / "report.json"));
    EXPECT_NEAR(rep["renormalization"]["V"].get<double>(), 4 * pi2 / 3, 1e-6);
    EXPECT_EQ(rep["status"], "pass");
    EXPECT_TRUE(rep["variation"].is_null());
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST(CliReport, ShippedScenariosParse) {
    int n = 0;
    for (const auto& e : fs::directory_iterator(AHE_SCENARIO_DIR)) {
        if (e.path().extension() != ".json") continue;
        EXPECT_NO_THROW(load_scenario(e.path().string())) << e.path();
        ++n;
    }
    EXPECT_GE(n, 5);
}

TEST(CliReport, CommandLine) {
    auto d = scratch_dir("cli");
    {
        std::ofstream(d / "ok.json") << small_hyperbolic().dump();
        EXPECT_EQ(run_cli("run " + (d / "ok.json").string() + " --out " + (d / "out").string(), d / "log"), 0)
            << slurp(d / "log");
        auto rep = Json::parse(slurp(d / "out" / "report.json"));
        EXPECT_NEAR(rep["renormalization"]["V"].get<double>(), 4 * pi2 / 3, 1e-6);
        EXPECT_LT(std::abs(rep["renormalization"]["residual_gb"].get<double>()), 1e-6);
    }
    {
        std::ofstream(d / "bad.json") << R"J({"family": "hyperbolic", "tasks": ["volume"], "grid": {"rho_max": -1}})J";
        EXPECT_EQ(run_cli("run " + (d / "bad.json").string(), d / "log"), 2);
        EXPECT_NE(slurp(d / "log").find("grid.rho_max"), std::string::npos) << slurp(d / "log");
    }
    {
        std::ofstream(d / "broken.json") << R"J({"family": "hyperbolic", )J";
        EXPECT_EQ(run_cli("run " + (d / "broken.json").string(), d / "log"), 2);
        EXPECT_NE(slurp(d / "log").find("malformed JSON"), std::string::npos);
    }
    {
        std::ofstream(d / "neg.json") << R"J({"family": "ads_schwarzschild", "params": {"m": -1}, "tasks": ["volume"]})J";
        EXPECT_EQ(run_cli("run " + (d / "neg.json").string() + " --out " + (d / "neg").string(), d / "log"), 3);
        EXPECT_NE(slurp(d / "log").find("metric_library"), std::string::npos);
    }
    EXPECT_EQ(run_cli("families", d / "log"), 0);
    EXPECT_NE(slurp(d / "log").find("ads_schwarzschild"), std::string::npos);
    EXPECT_NE(run_cli("suite nonsense", d / "log"), 0);
    fs::remove_all(d);
}
