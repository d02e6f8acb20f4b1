#pragma once
// Fefferman-Graham coefficients of a geodesic compactification
//   gbar_rho = g0 + rho g1 + rho^2 g2 + rho^3 g3 + ...
// by a linear least-squares fit in rho, and the formulas that predict g2, g3.

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "ahe/boundary_geometry.hpp"
#include "ahe/metric_library.hpp"
#include "ahe/quadrature.hpp"

namespace ahe {

struct FGOptions {
    int degree = 12;
    int samples = 128;
    double fit_max = 0.3;  // clipped to rho_max
    double fit_min_ratio = 1.0 / 40;
};

inline std::vector<double> default_rho_samples(const NormalFormMetric& nf, const FGOptions& opt = {}) {
    double hi = std::min(opt.fit_max, nf.rho_max());
    return chebyshev_nodes(opt.samples, hi * opt.fit_min_ratio, hi);
}

struct FGCoefficients {
    BoundaryGeometry geometry;  // of gamma = g0 as declared by the normal form
    TensorField g0, g1, g2, g3;
    double fit_residual = 0;
    double v0 = 0, v2 = 0;
    std::vector<double> rho_samples;
    std::vector<double> r_samples;
    int degree = 0;
    Eigen::MatrixXd projector;  // row k maps sample data to g_k

    // g_k at an arbitrary boundary point (differentiable in x), from the same fit
    template <class T>
    Mat<T, 3> coefficient_at(const NormalFormMetric& nf, int k, const Vec<T, 3>& x) const {
        Mat<T, 3> out = zero_mat<T, 3>();
        Mat<T, 3> g0 = nf.boundary_metric(x);
        for (std::size_t s = 0; s < rho_samples.size(); ++s) {
            Mat<T, 3> g = nf.slice(rho_samples[s], r_samples[s], x);
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) g[a][b] = g[a][b] - g0[a][b];
            double w = projector(k, long(s));
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) out[a][b] = out[a][b] + T(w) * g[a][b];
        }
        if (k == 0)
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) out[a][b] = out[a][b] + g0[a][b];
        return out;
    }
};

struct FGConstraints {
    double g1 = 0;         // max |g1|_gamma
    double trace_g3 = 0;   // max |tr g3|
    double div_g3 = 0;     // max |delta g3|_gamma
    double g2_vs_intrinsic = 0;  // max componentwise difference
    double v2_vs_scalar = 0;     // |v2 + (1/8) int s_gamma|
    bool einstein_to_third_order(double tol) const {
        return g1 <= tol && trace_g3 <= tol && div_g3 <= tol && g2_vs_intrinsic <= tol;
    }
};

namespace detail {

struct FitOperator {
    Eigen::MatrixXd taylor;  // rows k: data -> k-th Taylor coefficient at rho = 0
    Eigen::MatrixXd smooth;  // data -> fitted values at the samples
};

// Least squares in the Chebyshev basis of [rho_lo, rho_hi], converted exactly to
// Taylor coefficients at rho = 0 via the derivative recurrence
//   T_{j+1}^(k) = 2 s T_j^(k) + 2k T_j^(k-1) - T_{j-1}^(k).
inline FitOperator fit_operator(const std::vector<double>& rho, int degree) {
    const long n = long(rho.size()), m = degree + 1;
    const double lo = rho.front(), hi = rho.back();
    auto map = [&](double r) { return (2 * r - (lo + hi)) / (hi - lo); };
    Eigen::MatrixXd W(n, m);
    for (long i = 0; i < n; ++i) {
        double s = map(rho[i]);
        W(i, 0) = 1;
        if (m > 1) W(i, 1) = s;
        for (long j = 2; j < m; ++j) W(i, j) = 2 * s * W(i, j - 1) - W(i, j - 2);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(W);
    auto sv = svd.singularValues();
    if (!(sv(m - 1) > 0) || sv(0) / sv(m - 1) > 1e8)
        throw Error("fg_expansion", "ill-conditioned fit: sample range too narrow for the fit degree");
    Eigen::MatrixXd Q = W.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(n, n));
    // d[k][j] = T_j^(k)(s0)
    const double s0 = map(0.0), ds = 2 / (hi - lo);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m, m);
    for (long k = 0; k < m; ++k)
        for (long j = 0; j < m; ++j) {
            if (j == 0) d(k, j) = k == 0 ? 1 : 0;
            else if (j == 1) d(k, j) = k == 0 ? s0 : (k == 1 ? 1 : 0);
            else d(k, j) = 2 * s0 * d(k, j - 1) + (k > 0 ? 2 * k * d(k - 1, j - 1) : 0) - d(k, j - 2);
        }
    Eigen::MatrixXd D(m, m);
    double f = 1;
    for (long k = 0; k < m; ++k) {
        if (k > 0) f *= ds / double(k);
        D.row(k) = f * d.row(k);
    }
    return {D * Q, W * Q};
}

}  // namespace detail

// Intrinsic prediction g2 = -(Ric - s/4 gamma).
inline TensorField intrinsic_g2(const BoundaryGeometry& bg) {
    TensorField out(bg.gamma.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) out[i][a][b] = -(bg.ric[i][a][b] - 0.25 * bg.s[i] * bg.gamma[i][a][b]);
    return out;
}

inline FGCoefficients extract_coefficients(const NormalForm& nf, const BoundaryGrid& grid,
                                           std::vector<double> rho_samples, int degree = FGOptions{}.degree) {
    if (rho_samples.size() < 6) throw Error("fg_expansion", "at least 6 rho samples are required");
    // short sample lists fall back to a lower degree, never below 4
    degree = std::max(4, std::min(degree, int(rho_samples.size()) - 2));
    std::sort(rho_samples.begin(), rho_samples.end());
    for (double r : rho_samples)
        if (!(r > 0) || r > nf->rho_max() * (1 + 1e-12))
            throw Error("fg_expansion", "rho samples must lie in (0, rho_max]");
    FGCoefficients fg;
    fg.geometry = intrinsic_curvature(boundary_field(nf), grid);
    fg.rho_samples = rho_samples;
    fg.degree = degree;
    for (double r : rho_samples) fg.r_samples.push_back(nf->r_of_rho(r));
    auto op = detail::fit_operator(rho_samples, degree);
    fg.projector = op.taylor;

    const long ns = long(rho_samples.size());
    const std::size_t nn = grid.size();
    static constexpr int ia[6] = {0, 0, 0, 1, 1, 2}, ib[6] = {0, 1, 2, 1, 2, 2};
    std::array<TensorField, 4> out;
    for (auto& f : out) f.resize(nn);
    fg.fit_residual = 0;
    // the boundary metric is subtracted (in extended precision) before fitting and added back to g0,
    // so rounding in the projector does not leak the O(1) part into higher coefficients
    std::vector<std::vector<double>> dev;
    for (double r : rho_samples) dev.push_back(nf->profile_deviation(r));
    const std::size_t chunk = 1024;
    for (std::size_t i0 = 0; i0 < nn; i0 += chunk) {
        const std::size_t i1 = std::min(nn, i0 + chunk);
        Eigen::MatrixXd Y(ns, long((i1 - i0) * 6));
        for (long s = 0; s < ns; ++s)
            for (std::size_t i = i0; i < i1; ++i) {
                Mat3 g = zero_mat<double, 3>();
                for (std::size_t b = 0; b < dev[s].size(); ++b) {
                    Mat3 h = unit_block(nf->chart().blocks[b].kind, grid.nodes[i]);
                    for (int p = 0; p < 3; ++p)
                        for (int q = 0; q < 3; ++q) g[p][q] += dev[s][b] * h[p][q];
                }
                for (int c = 0; c < 6; ++c) Y(s, long((i - i0) * 6 + c)) = g[ia[c]][ib[c]];
            }
        Eigen::MatrixXd C = op.taylor.topRows(4) * Y;
        fg.fit_residual = std::max(fg.fit_residual, (op.smooth * Y - Y).cwiseAbs().maxCoeff());
        for (int k = 0; k < 4; ++k)
            for (std::size_t i = i0; i < i1; ++i)
                for (int c = 0; c < 6; ++c)
                    out[k][i][ia[c]][ib[c]] = out[k][i][ib[c]][ia[c]] = C(k, long((i - i0) * 6 + c));
    }
    auto field = [&](int k) { return out[k]; };
    fg.g0 = field(0);
    for (std::size_t i = 0; i < nn; ++i)
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) fg.g0[i][a][b] += fg.geometry.gamma[i][a][b];
    fg.g1 = field(1);
    fg.g2 = field(2);
    fg.g3 = field(3);

    fg.v0 = volume(fg.geometry);
    ScalarField tr(nn);
    for (std::size_t i = 0; i < nn; ++i) tr[i] = 0.5 * trace(fg.g2[i], inverse(fg.geometry.gamma[i]));
    fg.v2 = integrate(tr, fg.geometry);
    return fg;
}

inline FGCoefficients extract_coefficients(const NormalForm& nf, const BoundaryGrid& grid, const FGOptions& opt = {}) {
    return extract_coefficients(nf, grid, default_rho_samples(*nf, opt), opt.degree);
}

inline FGConstraints check_constraints(const NormalForm& nf, const FGCoefficients& fg) {
    FGConstraints c;
    const auto& bg = fg.geometry;
    const auto& grid = *bg.grid;
    TensorField g2i = intrinsic_g2(bg);
    auto g3 = [&](const Vec<D1<3>, 3>& x) { return fg.coefficient_at(*nf, 3, x); };
    for (std::size_t i = 0; i < grid.size(); ++i) {
        Mat3 gi = inverse(bg.gamma[i]);
        c.g1 = std::max(c.g1, std::sqrt(std::max(0.0, inner(fg.g1[i], fg.g1[i], gi))));
        c.trace_g3 = std::max(c.trace_g3, std::abs(trace(fg.g3[i], gi)));
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) c.g2_vs_intrinsic = std::max(c.g2_vs_intrinsic, std::abs(fg.g2[i][a][b] - g2i[i][a][b]));
        c.div_g3 = std::max(c.div_g3, covector_norm(divergence(*bg.field, g3, grid.nodes[i]), gi));
    }
    c.v2_vs_scalar = std::abs(fg.v2 + 0.125 * integrate(bg.s, bg));
    return c;
}

struct ExtrinsicOptions {
    int samples = 8;
    double rho_lo = 0.01;
    double rho_hi = 0.1;
};

// Tangential data of the compactified metric at one point (rho, x) with N = -d_rho:
//   dric_n(X,Y) = (nabla_N Ric)(X,Y) - (nabla_X Ric)(N,Y), symmetrized
//   n_s = N(sbar)
struct ExtrinsicSample {
    Mat3 dric_n{};
    double n_s = 0;
};

inline ExtrinsicSample extrinsic_sample(const MetricField<4>& gbar, const Vec4& X) {
    auto c = curvature_jet<4>(gbar, seed<double, 4>(X));
    auto v = [](const D1<4>& d) { return d.v; };
    // nabla_k Ric_ab
    auto nric = [&](int k, int a, int b) {
        double s = c.ric[a][b].d[k];
        for (int p = 0; p < 4; ++p) s -= v(c.gamma[p][k][a]) * v(c.ric[p][b]) + v(c.gamma[p][k][b]) * v(c.ric[a][p]);
        return s;
    };
    ExtrinsicSample out;
    Mat3 raw;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) raw[a][b] = -nric(0, a + 1, b + 1) + nric(a + 1, 0, b + 1);
    out.dric_n = symmetrize(raw);
    out.n_s = -c.s.d[0];
    return out;
}

struct ExtrinsicResult {
    TensorField dric_n;  // rho -> 0 limit of dRic(N), tangential block
    ScalarField n_s;     // rho -> 0 limit of N(sbar)
    double extrapolation_spread = 0;
};

inline ExtrinsicResult extrinsic_limits(const NormalForm& nf, const BoundaryGrid& grid, const ExtrinsicOptions& opt = {}) {
    auto field = compactified_field(nf);
    std::vector<double> rs = chebyshev_nodes(opt.samples, opt.rho_lo, opt.rho_hi);
    ExtrinsicResult res;
    res.dric_n.resize(grid.size());
    res.n_s.resize(grid.size());
    std::vector<std::vector<ExtrinsicSample>> samples(rs.size(), std::vector<ExtrinsicSample>(grid.size()));
    for (std::size_t s = 0; s < rs.size(); ++s)
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const Vec3& x = grid.nodes[i];
            samples[s][i] = extrinsic_sample(*field, Vec4{rs[s], x[0], x[1], x[2]});
        }
    std::vector<double> y(rs.size());
    std::vector<double> rs_short(rs.begin(), rs.end() - 1);
    auto extrapolate = [&](auto get, double& spread) {
        for (std::size_t s = 0; s < rs.size(); ++s) y[s] = get(s);
        double full = neville(rs, y);
        double shorter = neville(rs_short, std::vector<double>(y.begin(), y.end() - 1));
        spread = std::max(spread, std::abs(full - shorter));
        return full;
    };
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (int a = 0; a < 3; ++a)
            for (int b = a; b < 3; ++b)
                res.dric_n[i][a][b] = res.dric_n[i][b][a] =
                    extrapolate([&](std::size_t s) { return samples[s][i].dric_n[a][b]; }, res.extrapolation_spread);
        res.n_s[i] = extrapolate([&](std::size_t s) { return samples[s][i].n_s; }, res.extrapolation_spread);
    }
    double scale = 1;
    for (const auto& m : res.dric_n) scale = std::max(scale, max_abs(m));
    if (!(res.extrapolation_spread <= 1e-4 * scale))
        throw Error("fg_expansion", "extrapolation failure: rho -> 0 limit is unstable");
    return res;
}

// g3 = (1/6) dRic(N) at the boundary
inline TensorField extrinsic_g3(const NormalForm& nf, const BoundaryGrid& grid, const ExtrinsicOptions& opt = {}) {
    ExtrinsicResult e = extrinsic_limits(nf, grid, opt);
    TensorField out = e.dric_n;
    for (auto& m : out)
        for (auto& row : m)
            for (double& v : row) v /= 6;
    return out;
}

// Level-set quantities of rho in the compactified metric at (rho, x):
//   normal_ricci_vs_scalar = Ric(N,N) - sbar/6, normal_ricci_vs_mean_curvature = Ric(N,N) + H/rho,
//   riccati = dH/drho + |A|^2 + Ric(grad rho, grad rho)   (exact for geodesic rho)
// and the physical sectional curvature defect max |K_ij + 1| in an orthonormal frame.
struct CompactificationDiagnostics {
    double normal_ricci_vs_scalar = 0;
    double normal_ricci_vs_mean_curvature = 0;
    double riccati = 0;
    double sectional_defect = 0;
};

inline CompactificationDiagnostics compactification_diagnostics(const NormalForm& nf, const Vec3& x, double rho) {
    auto field = compactified_field(nf);
    Vec4 X{rho, x[0], x[1], x[2]};
    auto j = metric_jet<4>(*field, X);
    auto c = curvature_from_jet(j);
    CompactificationDiagnostics d;
    // A_ab = 1/2 d_rho g_ab on the level set
    Mat3 g, A, dA;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            g[a][b] = j.g[a + 1][b + 1];
            A[a][b] = 0.5 * j.dg[0][a + 1][b + 1];
            dA[a][b] = 0.5 * j.ddg[0][0][a + 1][b + 1];
        }
    Mat3 gi = inverse(g);
    double H = trace(A, gi);
    double A2 = inner(A, A, gi);
    // dH/drho = g^ab dA_ab - 2 A^ab A_ab
    double dH = trace(dA, gi) - 2 * A2;
    double ricnn = c.ric[0][0];
    d.normal_ricci_vs_scalar = ricnn - c.s / 6;
    d.normal_ricci_vs_mean_curvature = ricnn + H / rho;
    d.riccati = dH + A2 + ricnn;

    // physical metric g = rho^-2 gbar: curvature via the physical chart of the same point
    double r = nf->r_of_rho(rho);
    auto phys = physical_field(nf);
    auto pc = curvature_jet<4>(*phys, Vec4{r, x[0], x[1], x[2]});
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) {
            double k = pc.riem(a, b, a, b) / (pc.g[a][a] * pc.g[b][b] - pc.g[a][b] * pc.g[a][b]);
            d.sectional_defect = std::max(d.sectional_defect, std::abs(k + 1));
        }
    return d;
}

}  // namespace ahe
