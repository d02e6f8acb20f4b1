#pragma once
// Scenario configs, the run/suite drivers and deterministic report output.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ahe/error.hpp"
#include "ahe/fg_expansion.hpp"
#include "ahe/metric_library.hpp"
#include "ahe/renormalization.hpp"
#include "ahe/variation.hpp"

namespace ahe {

using Json = nlohmann::ordered_json;

inline constexpr const char* version = "0.1.0";

inline const std::vector<std::string>& task_names() {
    static const std::vector<std::string> t = {"fg", "volume", "weyl", "identities", "variation", "gb_boundary"};
    return t;
}

struct Tolerances {
    double identities = 1e-4;
    double constraints = 1e-6;
    double variations = 1e-3;
};

struct GridConfig {
    std::optional<Topology> topology;
    std::array<int, 3> resolution{16, 32, 16};
    double rho_max = 0.3;
    int rho_sample_count = 128;
    std::optional<std::vector<double>> rho_samples;  // explicit list overrides the count
    std::array<int, 3> weyl_resolution{8, 8, 8};
};

struct Scenario {
    std::string family;
    Params params;
    std::optional<CustomSpec> custom;
    std::optional<int> chi, tau;
    std::optional<double> eta;
    GridConfig grid;
    std::vector<std::string> tasks;  // canonical order
    std::string variation_parameter;
    std::optional<double> variation_dt;
    std::string output_dir = "out";
    std::string report_name = "report.json";
    bool csv = true;
    Tolerances tol;

    bool has(const std::string& t) const { return std::find(tasks.begin(), tasks.end(), t) != tasks.end(); }
};

// ---------------------------------------------------------------------------
// config parsing

namespace detail {

inline std::string join_path(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

inline const Json* find(const Json& obj, const std::string& key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

inline const Json& require(const Json& obj, const std::string& key, const std::string& base) {
    const Json* v = find(obj, key);
    if (!v) throw ConfigError(join_path(base, key), "missing required key");
    return *v;
}

inline double number(const Json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    return v.get<double>();
}

inline int integer(const Json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
    return v.get<int>();
}

inline std::string string(const Json& v, const std::string& path) {
    if (!v.is_string()) throw ConfigError(path, "expected a string");
    return v.get<std::string>();
}

inline const Json& object(const Json& v, const std::string& path) {
    if (!v.is_object()) throw ConfigError(path, "expected an object");
    return v;
}

inline void known_keys(const Json& obj, const std::string& base, std::initializer_list<const char*> keys) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : keys) ok = ok || it.key() == k;
        if (!ok) throw ConfigError(join_path(base, it.key()), "unknown key");
    }
}

inline std::array<int, 3> triple(const Json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 3) throw ConfigError(path, "expected an array of 3 integers");
    std::array<int, 3> out{};
    for (std::size_t i = 0; i < 3; ++i) {
        std::string p = path + "[" + std::to_string(i) + "]";
        out[i] = integer(v[i], p);
        if (out[i] < 8) throw ConfigError(p, "resolution must be at least 8");
    }
    return out;
}

inline double positive(const Json& v, const std::string& path) {
    double x = number(v, path);
    if (!(x > 0) || !std::isfinite(x)) throw ConfigError(path, "must be positive");
    return x;
}

}  // namespace detail

inline Scenario parse_scenario(const Json& cfg) {
    using namespace detail;
    if (!cfg.is_object()) throw ConfigError("<root>", "config must be a JSON object");
    known_keys(cfg, "", {"family", "params", "topology_invariants", "custom", "grid", "tasks", "variation", "output", "tolerances"});
    Scenario s;
    s.family = string(require(cfg, "family", ""), "family");
    bool known = false;
    for (const auto& f : families()) known = known || f.name == s.family;
    if (!known) throw ConfigError("family", "unknown family '" + s.family + "' (see `ahe_cli families`)");

    if (const Json* p = find(cfg, "params")) {
        object(*p, "params");
        for (auto it = p->begin(); it != p->end(); ++it) s.params[it.key()] = number(it.value(), "params." + it.key());
    }
    if (const Json* ti = find(cfg, "topology_invariants")) {
        object(*ti, "topology_invariants");
        known_keys(*ti, "topology_invariants", {"chi", "tau", "eta"});
        if (const Json* v = find(*ti, "chi")) s.chi = integer(*v, "topology_invariants.chi");
        if (const Json* v = find(*ti, "tau")) s.tau = integer(*v, "topology_invariants.tau");
        if (const Json* v = find(*ti, "eta")) s.eta = number(*v, "topology_invariants.eta");
    }
    if (const Json* c = find(cfg, "custom")) {
        if (s.family != "custom") throw ConfigError("custom", "only allowed with family \"custom\"");
        object(*c, "custom");
        known_keys(*c, "custom", {"u", "blocks", "r_min"});
        CustomSpec cs;
        cs.u = string(require(*c, "u", "custom"), "custom.u");
        const Json& blocks = require(*c, "blocks", "custom");
        if (!blocks.is_array() || blocks.empty()) throw ConfigError("custom.blocks", "expected a nonempty array");
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            std::string base = "custom.blocks[" + std::to_string(i) + "]";
            object(blocks[i], base);
            known_keys(blocks[i], base, {"symbol", "profile"});
            std::string sym = string(require(blocks[i], "symbol", base), base + ".symbol");
            try {
                block_kind_from_symbol(sym);
            } catch (const Error& e) {
                throw ConfigError(base + ".symbol", "unknown block symbol '" + sym + "'");
            }
            cs.blocks.emplace_back(sym, string(require(blocks[i], "profile", base), base + ".profile"));
        }
        if (const Json* r = find(*c, "r_min")) cs.r_min = number(*r, "custom.r_min");
        s.custom = cs;
    } else if (s.family == "custom") {
        throw ConfigError("custom", "missing required key (family \"custom\" needs a profile specification)");
    }

    if (const Json* g = find(cfg, "grid")) {
        object(*g, "grid");
        known_keys(*g, "grid", {"topology", "resolution", "rho_max", "rho_samples", "weyl_resolution"});
        if (const Json* v = find(*g, "topology")) {
            try {
                s.grid.topology = topology_from_string(string(*v, "grid.topology"));
            } catch (const ConfigError&) {
                throw;
            } catch (const Error& e) {
                throw ConfigError("grid.topology", e.what());
            }
        }
        if (const Json* v = find(*g, "resolution")) s.grid.resolution = triple(*v, "grid.resolution");
        if (const Json* v = find(*g, "weyl_resolution")) s.grid.weyl_resolution = triple(*v, "grid.weyl_resolution");
        if (const Json* v = find(*g, "rho_max")) s.grid.rho_max = positive(*v, "grid.rho_max");
        if (const Json* v = find(*g, "rho_samples")) {
            if (v->is_number_integer()) {
                s.grid.rho_sample_count = v->get<int>();
                if (s.grid.rho_sample_count < 8) throw ConfigError("grid.rho_samples", "need at least 8 samples");
            } else if (v->is_array()) {
                std::vector<double> r;
                for (std::size_t i = 0; i < v->size(); ++i) r.push_back(positive((*v)[i], "grid.rho_samples[" + std::to_string(i) + "]"));
                if (r.size() < 8) throw ConfigError("grid.rho_samples", "need at least 8 samples");
                s.grid.rho_samples = r;
            } else {
                throw ConfigError("grid.rho_samples", "expected a sample count or an array of rho values");
            }
        }
    }

    const Json& tasks = require(cfg, "tasks", "");
    if (!tasks.is_array() || tasks.empty()) throw ConfigError("tasks", "expected a nonempty array");
    std::set<std::string> req;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        std::string t = string(tasks[i], "tasks[" + std::to_string(i) + "]");
        if (std::find(task_names().begin(), task_names().end(), t) == task_names().end())
            throw ConfigError("tasks[" + std::to_string(i) + "]", "unknown task '" + t + "'");
        req.insert(t);
    }
    for (const auto& t : task_names())
        if (req.count(t)) s.tasks.push_back(t);

    if (const Json* v = find(cfg, "variation")) {
        object(*v, "variation");
        known_keys(*v, "variation", {"parameter", "dt"});
        s.variation_parameter = string(require(*v, "parameter", "variation"), "variation.parameter");
        if (const Json* dt = find(*v, "dt")) s.variation_dt = positive(*dt, "variation.dt");
    }
    if (s.has("variation")) {
        if (s.variation_parameter.empty()) throw ConfigError("variation.parameter", "missing required key (task \"variation\" requested)");
        if (!s.params.count(s.variation_parameter))
            throw ConfigError("variation.parameter", "'" + s.variation_parameter + "' is not a parameter of this scenario");
    }

    if (const Json* o = find(cfg, "output")) {
        object(*o, "output");
        known_keys(*o, "output", {"dir", "report", "csv"});
        if (const Json* v = find(*o, "dir")) s.output_dir = string(*v, "output.dir");
        if (const Json* v = find(*o, "report")) s.report_name = string(*v, "output.report");
        if (const Json* v = find(*o, "csv")) {
            if (!v->is_boolean()) throw ConfigError("output.csv", "expected true or false");
            s.csv = v->get<bool>();
        }
    }
    if (const Json* t = find(cfg, "tolerances")) {
        object(*t, "tolerances");
        known_keys(*t, "tolerances", {"identities", "constraints", "variations"});
        if (const Json* v = find(*t, "identities")) s.tol.identities = positive(*v, "tolerances.identities");
        if (const Json* v = find(*t, "constraints")) s.tol.constraints = positive(*v, "tolerances.constraints");
        if (const Json* v = find(*t, "variations")) s.tol.variations = positive(*v, "tolerances.variations");
    }
    if (s.family == "custom" && s.has("identities") && !s.chi)
        throw ConfigError("topology_invariants.chi", "missing required key (identities on a custom family)");
    return s;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open '" + path + "'");
    Json cfg;
    try {
        cfg = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
    }
    return parse_scenario(cfg);
}

// ---------------------------------------------------------------------------
// deterministic output

namespace detail {

inline std::string format_real(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s = buf;
    if (s.find_first_of(".en") == std::string::npos) s += ".0";
    return s;
}

inline void dump(const Json& j, std::string& out, int indent) {
    const std::string pad(std::size_t(indent + 2), ' '), close(std::size_t(indent), ' ');
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad + Json(it.key()).dump() + ": ";
                dump(it.value(), out, indent + 2);
            }
            out += "\n" + close + "}";
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            bool flat = true;
            for (const auto& e : j) flat = flat && e.is_primitive();
            out += flat ? "[" : "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += flat ? ", " : ",\n";
                if (!flat) out += pad;
                dump(j[i], out, indent + 2);
            }
            out += flat ? "]" : "\n" + close + "]";
            return;
        }
        case Json::value_t::number_float: out += format_real(j.get<double>()); return;
        default: out += j.dump(); return;
    }
}

}  // namespace detail

// Fixed field order (insertion order) and %.17g reals; non-finite reals become null.
inline std::string to_json_text(const Json& j) {
    std::string out;
    detail::dump(j, out, 0);
    out += "\n";
    return out;
}

inline Json opt_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json grid_json(const BoundaryGrid& g) {
    Json j;
    j["topology"] = to_string(g.topology);
    j["resolution"] = g.resolution;
    j["L"] = opt_json(g.circle_length);
    j["nodes"] = g.size();
    return j;
}

inline Json renorm_json(const RenormReport& r, bool weyl, bool identities) {
    Json j;
    auto w = [&](double v) { return weyl ? Json(v) : Json(nullptr); };
    auto id = [&](double v) { return identities ? Json(v) : Json(nullptr); };
    j["v0"] = r.v0;
    j["v2"] = r.v2;
    j["V"] = r.V;
    j["V_alt"] = r.V_alt;
    j["weyl_energy"] = w(r.weyl_energy);
    j["weyl_plus"] = w(r.weyl_plus);
    j["weyl_minus"] = w(r.weyl_minus);
    j["chi"] = r.chi;
    j["tau"] = r.tau;
    j["eta"] = r.eta;
    j["residual_gb"] = id(r.residual_gb);
    j["residual_sig"] = id(r.residual_sig);
    j["inequality_margin"] = id(r.inequality_margin);
    j["V_quoted_formula"] = opt_json(r.V_quoted_formula);
    j["non_einstein_correction"] = opt_json(r.non_einstein_correction);
    j["provenance"] = r.provenance;
    return j;
}

inline Json variation_json(const VariationReport& v) {
    Json j;
    j["dV"] = v.dV;
    j["dV_extrinsic"] = v.dV_extrinsic;
    j["dEta"] = v.dEta;
    j["dW"] = v.dW;
    j["dW_plus"] = v.dW_plus;
    j["dW_minus"] = v.dW_minus;
    Json fd;
    fd["dV"] = v.dV_fd;
    fd["dW"] = v.dW_fd;
    fd["step"] = v.step;
    j["fd_oracles"] = fd;
    Json c;
    for (const auto& [k, x] : v.consistency) c[k] = x;
    j["consistency_residuals"] = c;
    Json corr;
    corr["dV_extrinsic"] = v.dV_extrinsic_corrected;
    corr["dW"] = v.dW_corrected;
    j["corrected_coefficients"] = corr;
    if (v.kernel_theta_computed) {
        Json k;
        k["computed"] = *v.kernel_theta_computed;
        k["quoted"] = opt_json(v.kernel_theta_quoted);
        j["kernel_theta"] = k;
    }
    return j;
}

// One gated residual: pass iff value <= tolerance (or >= -tolerance for margins).
struct Check {
    std::string name;
    double value = 0;
    double tolerance = 0;
    bool pass = false;
};

inline Check le(const std::string& name, double value, double tol) { return {name, value, tol, std::abs(value) <= tol}; }

inline void print_checks(std::ostream& os, const std::vector<Check>& checks) {
    std::size_t w = 10;
    for (const auto& c : checks) w = std::max(w, c.name.size());
    char buf[256];
    for (const auto& c : checks) {
        std::snprintf(buf, sizeof buf, "  %-*s  %-4s  %.3e  (tol %.1e)\n", int(w), c.name.c_str(), c.pass ? "PASS" : "FAIL",
                      c.value, c.tolerance);
        os << buf;
    }
}

// ---------------------------------------------------------------------------
// run

struct RunResult {
    Json report;
    std::vector<Check> checks;
    std::vector<std::string> files;  // written, relative to the output dir
    bool pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

namespace detail {

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cli_report", "cannot write '" + p.string() + "'");
    out << text;
}

inline std::string csv_real(double v) { return format_real(v); }

}  // namespace detail

inline std::vector<double> gb_trace_rhos(double rho_max) {
    return geomspace(0.03, std::min(0.25, 0.9 * rho_max), 8);
}

inline RadialChartMetric scenario_metric(const Scenario& s) {
    std::optional<CustomSpec> custom = s.custom;
    if (custom && s.grid.topology) custom->topology = s.grid.topology;
    RadialChartMetric m = make_family(s.family, s.params, custom);
    if (s.grid.topology && *s.grid.topology != m.topology)
        throw ConfigError("grid.topology", "family " + s.family + " lives on " + to_string(m.topology));
    if (s.chi) m.chi = *s.chi;
    if (s.tau) m.tau = *s.tau;
    if (s.eta) m.eta = *s.eta;
    return m;
}

inline RunResult run(const Scenario& s, const std::optional<std::string>& out_override = std::nullopt) {
    namespace fs = std::filesystem;
    const double pi2 = std::numbers::pi * std::numbers::pi;
    RunResult res;
    Json& rep = res.report;
    const fs::path dir = out_override.value_or(s.output_dir);

    const bool want_fg = s.has("fg"), want_vol = s.has("volume") || s.has("identities") || s.has("gb_boundary"),
               want_weyl = s.has("weyl") || s.has("identities"), want_id = s.has("identities"), want_var = s.has("variation"),
               want_gb = s.has("gb_boundary");
    const bool need_fg = want_fg || want_vol || want_var;

    RadialChartMetric m = scenario_metric(s);
    NormalFormOptions nfo;
    nfo.rho_max = s.grid.rho_max;
    auto nf = to_normal_form(m, nfo);
    BoundaryGrid grid = make_grid_for(m, s.grid.resolution);

    FGOptions fgo;
    fgo.samples = s.grid.rho_sample_count;
    fgo.fit_max = s.grid.rho_max;
    std::vector<double> rho_samples = s.grid.rho_samples ? *s.grid.rho_samples : default_rho_samples(*nf, fgo);

    Json prov;
    prov["version"] = version;
    prov["family"] = m.family;
    Json params = Json::object();
    for (const auto& [k, v] : m.params) params[k] = v;
    prov["params"] = params;
    if (s.custom) {
        Json c;
        c["u"] = s.custom->u;
        Json b = Json::array();
        for (const auto& [sym, prof] : s.custom->blocks) b.push_back(Json{{"symbol", sym}, {"profile", prof}});
        c["blocks"] = b;
        c["r_min"] = s.custom->r_min;
        prov["custom"] = c;
    }
    Json g = grid_json(grid);
    g["rho_max"] = s.grid.rho_max;
    g["rho_samples"] = rho_samples.size();
    g["weyl_resolution"] = s.grid.weyl_resolution;
    prov["grid"] = g;
    prov["tasks"] = s.tasks;
    Json tol;
    tol["identities"] = s.tol.identities;
    tol["constraints"] = s.tol.constraints;
    tol["variations"] = s.tol.variations;
    prov["tolerances"] = tol;
    rep["provenance"] = prov;

    Json nfj;
    nfj["r_min"] = m.r_min;
    nfj["rho_inner"] = nf->rho_inner();
    nfj["log_c"] = nf->log_c();
    nfj["normalization"] = nf->normalization();
    nfj["gradient_residual_at_rho_max"] = nf->gradient_residual(s.grid.rho_max);
    rep["normal_form"] = nfj;

    std::optional<FGCoefficients> fg;
    std::optional<FGConstraints> cons;
    if (need_fg) {
        fg = extract_coefficients(nf, grid, rho_samples, fgo.degree);
        cons = check_constraints(nf, *fg);
    }
    if (want_fg) {
        Json f;
        f["degree"] = fg->degree;
        f["samples"] = fg->rho_samples.size();
        f["fit_residual"] = fg->fit_residual;
        f["v0"] = fg->v0;
        f["v2"] = fg->v2;
        Json c;
        c["g1"] = cons->g1;
        c["trace_g3"] = cons->trace_g3;
        c["div_g3"] = cons->div_g3;
        c["g2_vs_intrinsic"] = cons->g2_vs_intrinsic;
        c["v2_vs_scalar"] = cons->v2_vs_scalar;
        f["constraints"] = c;
        f["einstein_to_third_order"] = cons->einstein_to_third_order(s.tol.constraints);
        rep["fg"] = f;
        res.checks.push_back(le("fg.g1", cons->g1, s.tol.constraints));
        res.checks.push_back(le("fg.trace_g3", cons->trace_g3, s.tol.constraints));
        res.checks.push_back(le("fg.div_g3", cons->div_g3, s.tol.constraints));
        res.checks.push_back(le("fg.g2_vs_intrinsic", cons->g2_vs_intrinsic, s.tol.constraints));

        if (s.csv) {
            std::ostringstream os;
            os << "# FG coefficient fields g_k at the boundary nodes, components in the boundary chart\n";
            os << "# columns: x1, x2, x3, weight, then g{k}_{ab} for k = 0..3 and ab in 11,12,13,22,23,33\n";
            os << "x1,x2,x3,weight";
            const char* comp[] = {"11", "12", "13", "22", "23", "33"};
            const int ia[] = {0, 0, 0, 1, 1, 2}, ib[] = {0, 1, 2, 1, 2, 2};
            for (int k = 0; k < 4; ++k)
                for (const char* c2 : comp) os << ",g" << k << "_" << c2;
            os << "\n";
            const TensorField* fields[] = {&fg->g0, &fg->g1, &fg->g2, &fg->g3};
            for (std::size_t i = 0; i < grid.size(); ++i) {
                os << detail::csv_real(grid.nodes[i][0]) << "," << detail::csv_real(grid.nodes[i][1]) << ","
                   << detail::csv_real(grid.nodes[i][2]) << "," << detail::csv_real(grid.weights[i]);
                for (const auto* f : fields)
                    for (int c2 = 0; c2 < 6; ++c2) os << "," << detail::csv_real((*f)[i][ia[c2]][ib[c2]]);
                os << "\n";
            }
            res.files.push_back("fg_coefficients.csv");
            fs::create_directories(dir);
            detail::write_text(dir / res.files.back(), os.str());
        }
    }

    RenormReport rr;
    rr.chi = m.chi;
    rr.tau = m.tau;
    rr.eta = m.eta;
    rr.provenance = m.family + " " + nf->normalization();
    std::optional<RenormalizedVolume> vol;
    if (want_vol || want_var) {
        vol = renormalized_volume(nf, *fg);
        rr.v0 = vol->v0;
        rr.v2 = vol->v2;
        rr.V = vol->V;
        rr.V_alt = vol->V_alt;
        rr.V_quoted_formula = quoted_volume_formula(m);
        if (s.csv && want_vol) {
            std::vector<double> rs;
            for (double p : geomspace(0.01, s.grid.rho_max, 40)) rs.push_back(nf->r_of_rho(p));
            std::sort(rs.begin(), rs.end());
            auto prof = volume_profile(nf, grid, rs, rr.v0, rr.v2);
            std::ostringstream os;
            os << "# vol B(r) and the counterterm-subtracted value vol - v0/(3 rho^3) - v2/rho\n";
            os << "r,rho,volume,subtracted\n";
            for (const auto& p : prof)
                os << detail::csv_real(p.r) << "," << detail::csv_real(p.rho) << "," << detail::csv_real(p.volume) << ","
                   << detail::csv_real(p.subtracted) << "\n";
            res.files.push_back("volume_profile.csv");
            fs::create_directories(dir);
            detail::write_text(dir / res.files.back(), os.str());
        }
    }
    if (want_weyl) {
        auto w = weyl_energies(nf, make_grid_for(m, s.grid.weyl_resolution));
        rr.weyl_energy = w.total;
        rr.weyl_plus = w.plus;
        rr.weyl_minus = w.minus;
    }
    if (want_id) {
        rr = check_identities(rr);
        if (cons && !cons->einstein_to_third_order(s.tol.constraints))
            rr.non_einstein_correction = non_einstein_integral(nf, grid, nf->r_of_rho(0.01)) / (8 * pi2);
        res.checks.push_back(le("identities.residual_gb", rr.residual_gb, s.tol.identities));
        res.checks.push_back(le("identities.residual_sig", rr.residual_sig, s.tol.identities));
        res.checks.push_back({"identities.inequality_margin", rr.inequality_margin, s.tol.identities,
                              rr.inequality_margin >= -s.tol.identities});
    }
    if (want_vol || want_weyl) rep["renormalization"] = renorm_json(rr, want_weyl, want_id);

    if (want_var) {
        Family fam{m.family, m.params, s.variation_parameter, s.custom};
        if (s.custom && s.grid.topology) fam.custom->topology = s.grid.topology;
        VariationOptions vo;
        vo.normal_form = nfo;
        vo.fg = fgo;
        vo.weyl_resolution = s.grid.weyl_resolution;
        if (s.variation_dt) vo.relative_step = *s.variation_dt / std::max(1.0, std::abs(fam.value()));
        auto vr = run_variation(fam, s.grid.resolution, vo, true);
        Json vj = variation_json(vr);
        auto lm = lemma21_check(fam, grid, 0.2, vo);
        Json l;
        l["rho"] = 0.2;
        l["distance"] = lm.distance;
        l["lhs"] = lm.lhs;
        l["rhs"] = lm.rhs;
        l["residual"] = lm.residual;
        vj["lemma21"] = l;
        rep["variation"] = vj;
        res.checks.push_back(le("variation.pairing_vs_fd", vr.consistency.at("pairing_vs_fd"), s.tol.variations));
        res.checks.push_back(le("variation.weyl_fd_vs_pairing", vr.consistency.at("weyl_fd_vs_pairing"), s.tol.variations));
        res.checks.push_back(le("variation.lemma21", lm.residual, s.tol.variations));
    }

    if (want_gb) {
        auto tr = gauss_bonnet_trace(nf, grid, rr.V, gb_trace_rhos(s.grid.rho_max), std::abs(rr.V - rr.V_alt));
        Json gj;
        gj["slope"] = tr.slope;
        gj["resolved"] = tr.resolved;
        gj["converged"] = tr.converged;
        Json samples = Json::array();
        for (std::size_t i = 0; i < tr.samples.size(); ++i) {
            const auto& t = tr.samples[i];
            samples.push_back(Json{{"r", t.r}, {"rho", t.rho}, {"total", t.total}, {"remainder", tr.remainder[i]},
                                   {"noise_floor", tr.noise_floor[i]}});
        }
        gj["samples"] = samples;
        rep["gb_boundary"] = gj;
        res.checks.push_back({"gb_boundary.slope", tr.slope, -0.95, tr.converged});
        if (s.csv) {
            std::ostringstream os;
            os << "# Gauss-Bonnet boundary combination on B(r) against V; remainder = |total - V|\n";
            os << "r,rho,volume,cubic,curvature,total,remainder,noise_floor\n";
            for (std::size_t i = 0; i < tr.samples.size(); ++i) {
                const auto& t = tr.samples[i];
                os << detail::csv_real(t.r) << "," << detail::csv_real(t.rho) << "," << detail::csv_real(t.volume) << ","
                   << detail::csv_real(t.cubic) << "," << detail::csv_real(t.curvature) << "," << detail::csv_real(t.total)
                   << "," << detail::csv_real(tr.remainder[i]) << "," << detail::csv_real(tr.noise_floor[i]) << "\n";
            }
            res.files.push_back("gb_trace.csv");
            fs::create_directories(dir);
            detail::write_text(dir / res.files.back(), os.str());
        }
    }

    Json checks = Json::array();
    for (const auto& c : res.checks)
        checks.push_back(Json{{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}});
    rep["checks"] = checks;
    rep["status"] = res.pass() ? "pass" : "fail";

    fs::create_directories(dir);
    res.files.push_back(s.report_name);
    detail::write_text(dir / s.report_name, to_json_text(rep));
    return res;
}

// ---------------------------------------------------------------------------
// suites

struct SuiteRow {
    std::string case_name;
    std::string quantity;
    double value = 0;
    double tolerance = 0;
    bool pass = false;
};

struct SuiteCase {
    std::string label;
    std::string family;
    Params params;
    std::string parameter;  // for variations
};

inline std::vector<SuiteCase> suite_cases(bool einstein_only_with_parameter = false) {
    const double pi = std::numbers::pi;
    std::vector<SuiteCase> c;
    if (!einstein_only_with_parameter) c.push_back({"hyperbolic", "hyperbolic", {}, ""});
    c.push_back({"hyperbolic_quotient L=1", "hyperbolic_quotient", {{"L", 1.0}}, "L"});
    c.push_back({"hyperbolic_quotient L=pi", "hyperbolic_quotient", {{"L", pi}}, "L"});
    c.push_back({"ads_schwarzschild m=5/16", "ads_schwarzschild", {{"m", 5.0 / 16}}, "m"});
    c.push_back({"ads_schwarzschild m=1", "ads_schwarzschild", {{"m", 1.0}}, "m"});
    c.push_back({"ads_schwarzschild m=2", "ads_schwarzschild", {{"m", 2.0}}, "m"});
    return c;
}

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> n = {"identities", "constraints", "variations"};
    return n;
}

// Acceptance batteries over the built-in families; rows are appended as they finish.
inline std::vector<SuiteRow> run_suite(const std::string& name, std::ostream* progress = nullptr,
                                       std::array<int, 3> resolution = {16, 32, 16}) {
    const Tolerances tol;
    std::vector<SuiteRow> rows;
    auto add = [&](const std::string& c, const std::string& q, double v, double t, std::optional<bool> pass = std::nullopt) {
        rows.push_back({c, q, v, t, pass.value_or(std::abs(v) <= t)});
        if (progress) {
            char buf[256];
            std::snprintf(buf, sizeof buf, "%-28s %-34s %-4s %.3e (tol %.1e)\n", c.c_str(), q.c_str(),
                          rows.back().pass ? "PASS" : "FAIL", v, t);
            *progress << buf << std::flush;
        }
    };
    if (name == "identities") {
        for (const auto& sc : suite_cases()) {
            auto m = make_family(sc.family, sc.params);
            auto nf = to_normal_form(m);
            auto fg = extract_coefficients(nf, make_grid_for(m, resolution));
            auto vol = renormalized_volume(nf, fg);
            auto w = weyl_energies(nf, make_grid_for(m, {8, 8, 8}));
            RenormReport r;
            r.V = vol.V;
            r.weyl_energy = w.total;
            r.weyl_plus = w.plus;
            r.weyl_minus = w.minus;
            r.chi = m.chi;
            r.tau = m.tau;
            r.eta = m.eta;
            r = check_identities(r);
            add(sc.label, "gauss_bonnet residual", r.residual_gb, tol.identities);
            add(sc.label, "signature residual", r.residual_sig, tol.identities);
            add(sc.label, "volume bound margin", r.inequality_margin, tol.identities, r.inequality_margin >= -tol.identities);
        }
    } else if (name == "constraints") {
        for (const auto& sc : suite_cases()) {
            auto m = make_family(sc.family, sc.params);
            auto nf = to_normal_form(m);
            auto fg = extract_coefficients(nf, make_grid_for(m, resolution));
            auto c = check_constraints(nf, fg);
            add(sc.label, "|g1|", c.g1, 1e-7);
            add(sc.label, "|tr g3|", c.trace_g3, tol.constraints);
            add(sc.label, "|div g3|", c.div_g3, tol.constraints);
            add(sc.label, "g2 vs intrinsic", c.g2_vs_intrinsic, tol.constraints);
        }
    } else if (name == "variations") {
        for (const auto& sc : suite_cases(true)) {
            Family fam{sc.family, sc.params, sc.parameter, std::nullopt};
            auto v = run_variation(fam, resolution);
            for (const char* k : {"pairing_vs_extrinsic", "pairing_vs_weyl", "pairing_vs_fd", "extrinsic_vs_weyl", "extrinsic_vs_fd",
                                  "weyl_vs_fd", "dW_vs_weyl_fd", "weyl_fd_vs_pairing", "corrected_extrinsic_vs_pairing",
                                  "corrected_dW_vs_minus_6_dV"})
                add(sc.label, k, v.consistency.at(k), tol.variations);
        }
    } else {
        throw Error("cli_report", "unknown suite '" + name + "' (identities, constraints, variations)");
    }
    return rows;
}

}  // namespace ahe
