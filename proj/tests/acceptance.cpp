// Acceptance battery: one PASS/FAIL line per criterion, exit status 1 if any fails.
// With --known-failures 5,6 the exit status is 0 only if exactly the listed criteria fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "ahe/ahe.hpp"
#include "ahe/report.hpp"

using namespace ahe;

namespace {

const double pi = std::numbers::pi;
const double pi2 = pi * pi;
const std::array<int, 3> default_res{16, 32, 16};
const std::array<int, 3> weyl_res{8, 8, 8};
const std::array<int, 3> extrinsic_res{8, 16, 8};

// criterion 1
constexpr double tol_hyp_V_rel = 1e-6, tol_hyp_W = 1e-10, tol_hyp_gb = 1e-6, max_runtime_s = 30;
// criterion 2
constexpr double tol_quot_V = 1e-8, tol_quot_g3 = 1e-7;
// criteria 3, 4
constexpr double tol_ads_V = 1e-5, tol_ads_rel = 1e-4, tol_ads_gb = 1e-4;
// criterion 5
constexpr double tol_g1 = 1e-7, tol_trace_g3 = 1e-6, tol_div_g3 = 1e-6, tol_g2 = 1e-6, tol_ext_g3 = 1e-5;
// criterion 6
constexpr double tol_square = 1e-3;
// criterion 7
constexpr double tol_lemma = 1e-3, lemma_rho = 0.2;
// criterion 8
constexpr double max_gb_slope = -1;
// criterion 9
constexpr double tol_cotton_zero = 1e-8, min_cotton_berger = 0.1, tol_cotton_residual = 1e-8, tol_deta = 1e-10,
                 min_dV = 0.1;
// criterion 10
constexpr double fd_ratio_lo = 12, fd_ratio_hi = 20, tol_V_invariance = 1e-6, tol_bound_equality = 1e-6,
                 min_bound_slack = 1e-3;

struct Line {
    std::ostringstream detail;
    bool pass = true;
    void check(bool ok, const std::string& what) {
        if (!ok) pass = false;
        detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [fail]");
    }
};

std::string fmt(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.3e", v);
    return b;
}

struct Pipeline {
    RadialChartMetric m;
    NormalForm nf;
    BoundaryGrid grid;
    FGCoefficients fg;
    RenormalizedVolume rv;
    std::optional<WeylEnergies> weyl;
    RenormReport report() const {
        RenormReport r;
        r.v0 = rv.v0;
        r.v2 = rv.v2;
        r.V = rv.V;
        r.V_alt = rv.V_alt;
        r.chi = m.chi;
        r.tau = m.tau;
        r.eta = m.eta;
        if (weyl) {
            r.weyl_energy = weyl->total;
            r.weyl_plus = weyl->plus;
            r.weyl_minus = weyl->minus;
        }
        return check_identities(r);
    }
};

Pipeline pipeline(const RadialChartMetric& m, bool with_weyl, std::array<int, 3> res = default_res) {
    Pipeline p{m, to_normal_form(m), make_grid_for(m, res), {}, {}, {}};
    p.fg = extract_coefficients(p.nf, p.grid);
    p.rv = renormalized_volume(p.nf, p.fg);
    if (with_weyl) p.weyl = weyl_energies(p.nf, make_grid_for(m, weyl_res));
    return p;
}

double max_abs(const TensorField& t) {
    double e = 0;
    for (const auto& m : t)
        for (const auto& row : m)
            for (double v : row) e = std::max(e, std::abs(v));
    return e;
}

RadialChartMetric ads(double m) { return make_family("ads_schwarzschild", {{"m", m}}); }

std::vector<RadialChartMetric> built_in_members() {
    return {make_family("hyperbolic", {}), make_family("hyperbolic_quotient", {{"L", 1.0}}),
            make_family("hyperbolic_quotient", {{"L", pi}}), ads(5.0 / 16), ads(1), ads(2)};
}

std::string label(const RadialChartMetric& m) {
    std::string s = m.family;
    for (const auto& [k, v] : m.params) s += " " + k + "=" + fmt(v);
    return s;
}

// unit-curvature hyperbolic ball in Poincare coordinates
auto hyperbolic_ball = [](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    S r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3];
    S c = S(4.0) / ((S(1.0) - r2) * (S(1.0) - r2));
    Mat<S, 4> g = zero_mat<S, 4>();
    for (int i = 0; i < 4; ++i) g[i][i] = c;
    return g;
};

Line criterion1() {
    Line l;
    auto t0 = std::chrono::steady_clock::now();
    auto p = pipeline(make_family("hyperbolic", {}), true);
    auto r = p.report();
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    double rel = std::abs(r.V - 4 * pi2 / 3) / (4 * pi2 / 3);
    l.check(rel < tol_hyp_V_rel, "V=" + fmt(r.V) + " rel err " + fmt(rel));
    l.check(std::abs(r.weyl_energy) < tol_hyp_W, "W=" + fmt(r.weyl_energy));
    l.check(r.chi == 1 && std::abs(r.residual_gb) < tol_hyp_gb, "gb residual " + fmt(r.residual_gb));
    l.check(secs < max_runtime_s, "runtime " + fmt(secs) + " s");
    return l;
}

Line criterion2() {
    Line l;
    for (double L : {1.0, pi}) {
        auto p = pipeline(make_family("hyperbolic_quotient", {{"L", L}}), false);
        l.check(std::abs(p.rv.V) < tol_quot_V, "L=" + fmt(L) + " V=" + fmt(p.rv.V));
        l.check(max_abs(p.fg.g3) < tol_quot_g3, "max|g3|=" + fmt(max_abs(p.fg.g3)));
    }
    return l;
}

Line criterion3() {
    Line l;
    auto r = pipeline(ads(1), true).report();
    double W = 16 * pi2;
    l.check(std::abs(r.V) < tol_ads_V, "V=" + fmt(r.V));
    l.check(std::abs(r.weyl_energy - W) / W < tol_ads_rel, "W rel err " + fmt(std::abs(r.weyl_energy - W) / W));
    l.check(r.chi == 2 && std::abs(r.residual_gb) < tol_ads_gb, "gb residual " + fmt(r.residual_gb));
    double sig = std::abs(r.weyl_plus - r.weyl_minus) / r.weyl_energy;
    l.check(sig < tol_ads_rel && std::abs(r.residual_sig) < tol_ads_gb, "|W+ - W-|/W=" + fmt(sig));
    return l;
}

Line criterion4() {
    Line l;
    auto r = pipeline(ads(5.0 / 16), true).report();
    double W = 100 * pi2 / 7, V = 2 * pi2 / 7;
    l.check(std::abs(r.weyl_energy - W) / W < tol_ads_rel, "W rel err " + fmt(std::abs(r.weyl_energy - W) / W));
    l.check(std::abs(r.V - V) / V < tol_ads_rel, "V rel err " + fmt(std::abs(r.V - V) / V));
    l.check(std::abs(r.residual_gb) < tol_ads_gb, "gb residual " + fmt(r.residual_gb));
    return l;
}

Line criterion5() {
    Line l;
    for (const auto& m : built_in_members()) {
        auto p = pipeline(m, false);
        auto c = check_constraints(p.nf, p.fg);
        bool ok = c.g1 < tol_g1 && c.trace_g3 < tol_trace_g3 && c.div_g3 < tol_div_g3 && c.g2_vs_intrinsic < tol_g2;
        l.check(ok, label(m) + ": g1 " + fmt(c.g1) + " tr " + fmt(c.trace_g3) + " div " + fmt(c.div_g3) + " g2 " +
                        fmt(c.g2_vs_intrinsic));
        // extrinsic comparison on a coarser grid, fit redone there
        auto grid = make_grid_for(m, extrinsic_res);
        auto fg = extract_coefficients(p.nf, grid);
        auto ext = extrinsic_g3(p.nf, grid);
        double lit = 0, cor = 0;
        for (std::size_t i = 0; i < grid.size(); ++i)
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) {
                    lit = std::max(lit, std::abs(fg.g3[i][a][b] - ext[i][a][b]));
                    cor = std::max(cor, std::abs(fg.g3[i][a][b] - 2 * ext[i][a][b]));
                }
        l.check(lit < tol_ext_g3, "g3 vs dRic(N)/6 " + fmt(lit) + " (vs dRic(N)/3 " + fmt(cor) + ")");
    }
    return l;
}

Line criterion6(VariationReport& out) {
    Line l;
    Family fam{"ads_schwarzschild", {{"m", 1.0}}, "m", {}};
    VariationOptions o;
    o.weyl_resolution = weyl_res;
    auto r = run_variation(fam, default_res, o, false);
    out = r;
    const double target = -2 * pi2 / 3;
    std::map<std::string, double> legs{{"pairing", r.dV}, {"extrinsic", r.dV_extrinsic}, {"weyl", -r.dW / 6}, {"fd", r.dV_fd}};
    for (const auto& [k, v] : legs) l.check(std::abs(v - target) / std::abs(target) < tol_square, k + "=" + fmt(v));
    for (auto i = legs.begin(); i != legs.end(); ++i)
        for (auto j = std::next(i); j != legs.end(); ++j) {
            double gap = std::abs(i->second - j->second) / std::max(std::abs(i->second), std::abs(j->second));
            l.check(gap < tol_square, i->first + "/" + j->first + " " + fmt(gap));
        }
    l.detail << "; diagnostics: corrected extrinsic " << fmt(r.dV_extrinsic_corrected) << ", corrected -dW/6 "
             << fmt(-r.dW_corrected / 6);
    return l;
}

Line criterion7() {
    Line l;
    for (double m : {5.0 / 16, 1.0, 2.0}) {
        Family fam{"ads_schwarzschild", {{"m", m}}, "m", {}};
        auto res = lemma21_check(fam, make_grid_for(fam.at(m), {8, 8, 8}), lemma_rho);
        l.check(res.residual < tol_lemma, "m=" + fmt(m) + " residual " + fmt(res.residual));
    }
    return l;
}

Line criterion8() {
    Line l;
    for (const auto& m : {make_family("hyperbolic", {}), make_family("hyperbolic_quotient", {{"L", pi}}), ads(1)}) {
        auto p = pipeline(m, false);
        auto tr = gauss_bonnet_trace(p.nf, p.grid, p.rv.V, gb_trace_rhos(p.nf->rho_max()),
                                     std::abs(p.rv.V - p.rv.V_alt));
        std::string what = label(m) + " slope " + (std::isinf(tr.slope) ? std::string("exact") : fmt(tr.slope)) +
                           " resolved " + std::to_string(tr.resolved);
        l.check(tr.converged && tr.slope <= max_gb_slope, what);
    }
    return l;
}

Line criterion9(const VariationReport& ads_var) {
    Line l;
    auto s3 = cotton_york(intrinsic_curvature(round_s3(), make_grid(Topology::S3, {8, 8, 8})));
    auto s2s1 = cotton_york(intrinsic_curvature(product_s2xs1(), make_grid(Topology::S2xS1, {12, 8, 8}, 2.0)));
    l.check(s3.sup_norm < tol_cotton_zero, "round S3 " + fmt(s3.sup_norm));
    l.check(s2s1.sup_norm < tol_cotton_zero, "S2xS1 " + fmt(s2s1.sup_norm));
    auto b = cotton_york(intrinsic_curvature(berger_s3(0.8), make_grid(Topology::S3, {8, 8, 8})));
    l.check(b.sup_norm > min_cotton_berger, "Berger " + fmt(b.sup_norm));
    l.check(b.trace_residual < tol_cotton_residual && b.divergence_residual < tol_cotton_residual,
            "trace " + fmt(b.trace_residual) + " div " + fmt(b.divergence_residual));
    l.check(std::abs(ads_var.dEta) < tol_deta && std::abs(ads_var.dV) > min_dV,
            "AdS m=1 |deta|=" + fmt(std::abs(ads_var.dEta)) + " |dV|=" + fmt(std::abs(ads_var.dV)));
    return l;
}

Line criterion10() {
    Line l;
    // constant-curvature residual R + (1/2) g o g of finite-difference curvature, no extrapolation
    Vec4 x{0.2, -0.1, 0.3, 0.05};
    auto g = hyperbolic_ball(x);
    auto kn = kulkarni_nomizu(g, g);
    MetricPoint pt{x, g, 1};
    auto f = [](const Vec4& y) { return hyperbolic_ball(y); };
    auto residual = [&](double h) {
        auto c = curvature_at(f, pt, h, {false});
        double e = 0;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                for (int cc = 0; cc < 4; ++cc)
                    for (int d = 0; d < 4; ++d) e = std::max(e, std::abs(c.riem(a, b, cc, d) + 0.5 * kn(a, b, cc, d)));
        return e;
    };
    double ratio = residual(2e-2) / residual(1e-2);
    l.check(ratio > fd_ratio_lo && ratio < fd_ratio_hi, "step-halving ratio " + fmt(ratio));

    auto a = pipeline(ads(1), false);
    double dv = std::abs(renormalized_volume_perturbed(a.nf, a.fg, [](const Vec3& y) {
                             return 0.1 * std::cos(y[0]) + 0.05 * std::sin(y[1]);
                         }) - a.rv.V);
    auto h = pipeline(make_family("hyperbolic", {}), false);
    double dh = std::abs(renormalized_volume_perturbed(h.nf, h.fg, [](const Vec3& y) { return 0.2 * std::cos(2 * y[0]); }) -
                         h.rv.V);
    l.check(std::max(dv, dh) < tol_V_invariance, "V perturbation " + fmt(std::max(dv, dh)));

    for (const auto& m : built_in_members()) {
        auto p = pipeline(m, false);
        double slack = volume_bound_slack(p.report());
        bool hyperbolic = m.family != "ads_schwarzschild";
        bool ok = hyperbolic ? std::abs(slack) < tol_bound_equality : slack > min_bound_slack;
        l.check(ok, label(m) + " slack " + fmt(slack));
    }
    return l;
}

}  // namespace

int main(int argc, char** argv) {
    std::optional<std::set<int>> known;
    for (int i = 1; i < argc; ++i) {
        if (std::string(argv[i]) == "--known-failures" && i + 1 < argc) {
            known.emplace();
            std::stringstream ss(argv[++i]);
            for (std::string t; std::getline(ss, t, ',');) known->insert(std::stoi(t));
        } else {
            std::fprintf(stderr, "usage: acceptance [--known-failures N,M,...]\n");
            return 2;
        }
    }
    std::vector<std::pair<std::string, std::function<Line()>>> criteria;
    VariationReport ads_var;
    criteria.emplace_back("hyperbolic volume, Weyl energy, Gauss-Bonnet, runtime", criterion1);
    criteria.emplace_back("hyperbolic quotients V = 0, g3 = 0", criterion2);
    criteria.emplace_back("AdS-Schwarzschild m = 1", criterion3);
    criteria.emplace_back("AdS-Schwarzschild m = 5/16", criterion4);
    criteria.emplace_back("FG constraints on built-in families", criterion5);
    criteria.emplace_back("variation consistency square", [&] { return criterion6(ads_var); });
    criteria.emplace_back("domain volume variation", criterion7);
    criteria.emplace_back("Gauss-Bonnet boundary combination", criterion8);
    criteria.emplace_back("Cotton-York and dV vs deta", [&] { return criterion9(ads_var); });
    criteria.emplace_back("property suites", criterion10);

    int failed = 0;
    std::set<int> failures;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Line l;
        try {
            l = criteria[i].second();
        } catch (const std::exception& e) {
            l.pass = false;
            l.detail << "exception: " << e.what();
        }
        if (!l.pass) {
            ++failed;
            failures.insert(int(i + 1));
        }
        std::printf("CRITERION %zu: %s  %s: %s\n", i + 1, l.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                    l.detail.str().c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    if (known) {
        bool as_known = failures == *known;
        std::printf("failures %s the known list\n", as_known ? "match" : "do not match");
        return as_known ? 0 : 1;
    }
    return failed ? 1 : 0;
}
