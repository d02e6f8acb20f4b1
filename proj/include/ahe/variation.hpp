#pragma once
// Boundary variational calculus: dV, d eta and dW as pairings against
// h0 = d gamma_t / dt, finite-difference oracles across a family, the
// volume-variation identity on compact domains and the +/- decomposition
// of finite spans of variations.

#include <Eigen/Dense>
#include <numbers>

#include "ahe/renormalization.hpp"

namespace ahe {

// A one-parameter curve t -> make_family(name, params with params[parameter] = t).
struct Family {
    std::string name;
    Params params;
    std::string parameter;
    std::optional<CustomSpec> custom;

    double value() const {
        auto it = params.find(parameter);
        if (it == params.end()) throw Error("variation", "family parameter '" + parameter + "' has no base value");
        return it->second;
    }
    RadialChartMetric at(double t) const {
        Params p = params;
        p[parameter] = t;
        return make_family(name, p, custom);
    }
};

struct VariationOptions {
    double relative_step = 1e-4;  // dt = relative_step * max(1, |t|)
    std::array<int, 3> weyl_resolution{8, 8, 8};
    WeylOptions weyl{};
    FGOptions fg{};
    ExtrinsicOptions extrinsic{};
    VolumeOptions volume{};
    NormalFormOptions normal_form{};
};

inline double parameter_step(double t, double relative = 1e-4) { return relative * std::max(1.0, std::abs(t)); }

// central difference with one Richardson level; f may return anything with + - and scalar *
template <class F>
auto fd_derivative(F f, double t, double h) {
    using V = std::decay_t<decltype(f(t))>;  // materialised: no expression templates
    V d1 = (f(t + h) - f(t - h)) * (1 / (2 * h));
    V d2 = (f(t + h / 2) - f(t - h / 2)) * (1 / h);
    return V((d2 * 4.0 - d1) * (1.0 / 3));
}

namespace detail {

struct FieldVec {
    TensorField v;
    FieldVec operator+(const FieldVec& o) const { return combine(o, 1); }
    FieldVec operator-(const FieldVec& o) const { return combine(o, -1); }
    FieldVec operator*(double s) const {
        FieldVec r = *this;
        for (auto& m : r.v)
            for (auto& row : m)
                for (auto& x : row) x *= s;
        return r;
    }
    FieldVec combine(const FieldVec& o, double s) const {
        FieldVec r = *this;
        for (std::size_t i = 0; i < r.v.size(); ++i)
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) r.v[i][a][b] += s * o.v[i][a][b];
        return r;
    }
};

// per-coordinate stretch of the periodic directions that carry the circle length
inline Vec3 periodic_scale(const RadialChartMetric& m, const RadialChartMetric& base) {
    if (!m.circle_length || !base.circle_length) return {1, 1, 1};
    double s = *m.circle_length / *base.circle_length;
    if (m.topology == Topology::S2xS1) return {1, 1, s};
    if (m.topology == Topology::T3) return {s, s, s};
    return {1, 1, 1};
}

}  // namespace detail

// gamma_t on the fixed coordinates of the base grid: first block normalised to the unit
// model, periodic directions pulled back by psi -> (L_t/L_0) psi.
inline TensorField representative_boundary_metric(const NormalFormMetric& nf, const RadialChartMetric& base,
                                                  const BoundaryGrid& grid) {
    const auto& m = nf.chart();
    if (m.topology != base.topology || m.blocks.size() != base.blocks.size())
        throw Error("variation", "family members must share topology and block layout");
    Vec3 sc = detail::periodic_scale(m, base);
    TensorField out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        Mat3 g = nf.boundary_metric(grid.nodes[i]);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) g[a][b] *= sc[a] * sc[b];
        out[i] = g;
    }
    return out;
}

// h0 = d gamma_t/dt at the family's base value
inline TensorField boundary_variation(const Family& fam, const BoundaryGrid& grid, const VariationOptions& o = {}) {
    const double t0 = fam.value();
    const RadialChartMetric base = fam.at(t0);
    auto gamma = [&](double t) {
        auto nf = to_normal_form(fam.at(t), o.normal_form);
        return detail::FieldVec{representative_boundary_metric(*nf, base, grid)};
    };
    return fd_derivative(gamma, t0, parameter_step(t0, o.relative_step)).v;
}

inline double dV_pairing(const TensorField& g3, const TensorField& h0, const BoundaryGeometry& bg) {
    return -0.25 * pair_integrate(g3, h0, bg);
}

inline double d_eta(const BoundaryGeometry& bg, const TensorField& h0) {
    if (bg.cotton.empty()) throw Error("variation", "Cotton-York tensor not computed on this geometry");
    return -pair_integrate(bg.cotton, h0, bg) / (24 * std::numbers::pi * std::numbers::pi);
}

// Extrinsic pairings. `value` uses the quoted coefficients (-1/24 for dV, 1/4 for dW);
// `corrected` uses -1/12 and 1/2, which follow from N(Ric_gbar) -> 3 g3 at the boundary.
struct ExtrinsicPairing {
    double value = 0;
    double corrected = 0;
};

inline ExtrinsicPairing dV_extrinsic(const ExtrinsicResult& ex, const BoundaryGeometry& bg, const TensorField& h0) {
    double p = pair_integrate(ex.dric_n, h0, bg);
    return {-p / 24, -p / 12};
}

// pairing of h0 with d(Ric - (s/6) gbar)(N) = dRic(N) - (1/6) N(s) gamma
inline ExtrinsicPairing dW_boundary(const ExtrinsicResult& ex, const BoundaryGeometry& bg, const TensorField& h0) {
    TensorField k = ex.dric_n;
    for (std::size_t i = 0; i < k.size(); ++i)
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) k[i][a][b] -= ex.n_s[i] * bg.gamma[i][a][b] / 6;
    double p = pair_integrate(k, h0, bg);
    return {p / 4, p / 2};
}

// Below this magnitude consistency gaps are absolute: a family with dV = 0 has only noise to compare.
inline constexpr double gap_floor = 1e-2;

// Split of dW along the signature identity d(W+ - W-) = -12 pi^2 d eta.
inline std::pair<double, double> weyl_split(double dW, double dEta) {
    const double c = 12 * std::numbers::pi * std::numbers::pi * dEta;
    return {0.5 * (dW - c), 0.5 * (dW + c)};
}

// |a - b| relative to the larger magnitude, but never to less than `floor`
inline double relative_gap(double a, double b, double floor = gap_floor) {
    double s = std::max({std::abs(a), std::abs(b), floor});
    return std::abs(a - b) / s;
}

struct VariationReport {
    double dV = 0, dV_extrinsic = 0, dEta = 0, dW = 0, dW_plus = 0, dW_minus = 0;
    double dV_extrinsic_corrected = 0, dW_corrected = 0;
    double dV_fd = 0, dW_fd = 0;
    std::map<std::string, double> consistency;  // pairwise relative gaps
    std::optional<double> kernel_theta_computed, kernel_theta_quoted;
    double step = 0;
};

namespace detail {

struct PipelineValues {
    double V = 0, W = 0;
};

inline PipelineValues pipeline_values(const RadialChartMetric& m, const std::array<int, 3>& fg_res, const VariationOptions& o,
                                      bool weyl) {
    auto nf = to_normal_form(m, o.normal_form);
    auto grid = make_grid_for(m, fg_res);
    auto fg = extract_coefficients(nf, grid, o.fg);
    PipelineValues v;
    v.V = renormalized_volume(nf, fg, o.volume).V;
    if (weyl) v.W = weyl_energies(nf, make_grid_for(m, o.weyl_resolution), o.weyl).total;
    return v;
}

}  // namespace detail

// Everything needed for the consistency square at the family's base value.
inline VariationReport run_variation(const Family& fam, const std::array<int, 3>& resolution, const VariationOptions& o = {},
                                     bool with_weyl_fd = true) {
    const double t0 = fam.value();
    const RadialChartMetric m = fam.at(t0);
    auto nf = to_normal_form(m, o.normal_form);
    auto grid = make_grid_for(m, resolution);
    auto fg = extract_coefficients(nf, grid, o.fg);
    BoundaryGeometry bg = with_cotton(fg.geometry);
    VariationReport r;
    r.step = parameter_step(t0, o.relative_step);
    TensorField h0 = boundary_variation(fam, grid, o);
    r.dV = dV_pairing(fg.g3, h0, bg);
    r.dEta = d_eta(bg, h0);

    auto coarse = make_grid_for(m, {std::min(resolution[0], 12), std::min(resolution[1], 12), std::min(resolution[2], 12)});
    auto ex = extrinsic_limits(nf, coarse, o.extrinsic);
    auto cbg = intrinsic_curvature(boundary_field(nf), coarse);
    TensorField h0c = boundary_variation(fam, coarse, o);
    auto ve = dV_extrinsic(ex, cbg, h0c);
    auto we = dW_boundary(ex, cbg, h0c);
    r.dV_extrinsic = ve.value;
    r.dV_extrinsic_corrected = ve.corrected;
    r.dW = we.value;
    r.dW_corrected = we.corrected;
    std::tie(r.dW_plus, r.dW_minus) = weyl_split(r.dW, r.dEta);

    // finite differences of the computed V(t) and W(t)
    std::map<double, detail::PipelineValues> cache;
    auto at = [&](double t) -> const detail::PipelineValues& {
        auto it = cache.find(t);
        if (it == cache.end()) it = cache.emplace(t, detail::pipeline_values(fam.at(t), resolution, o, with_weyl_fd)).first;
        return it->second;
    };
    r.dV_fd = fd_derivative([&](double t) { return at(t).V; }, t0, r.step);
    if (with_weyl_fd) r.dW_fd = fd_derivative([&](double t) { return at(t).W; }, t0, r.step);

    r.consistency["pairing_vs_extrinsic"] = relative_gap(r.dV, r.dV_extrinsic);
    r.consistency["pairing_vs_weyl"] = relative_gap(r.dV, -r.dW / 6);
    r.consistency["pairing_vs_fd"] = relative_gap(r.dV, r.dV_fd);
    r.consistency["extrinsic_vs_weyl"] = relative_gap(r.dV_extrinsic, -r.dW / 6);
    r.consistency["extrinsic_vs_fd"] = relative_gap(r.dV_extrinsic, r.dV_fd);
    r.consistency["weyl_vs_fd"] = relative_gap(-r.dW / 6, r.dV_fd);
    if (with_weyl_fd) {
        r.consistency["dW_vs_weyl_fd"] = relative_gap(r.dW, r.dW_fd);
        r.consistency["weyl_fd_vs_pairing"] = relative_gap(-r.dW_fd / 6, r.dV);
    }
    r.consistency["corrected_extrinsic_vs_pairing"] = relative_gap(r.dV_extrinsic_corrected, r.dV);
    r.consistency["corrected_dW_vs_minus_6_dV"] = relative_gap(r.dW_corrected, -6 * r.dV);

    if (m.family == "ads_schwarzschild") {
        // theta-theta coefficient of the dV kernel -g3/4 relative to gamma, against the quoted m/2
        double k = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) k += -0.25 * fg.g3[i][2][2] / fg.geometry.gamma[i][2][2];
        r.kernel_theta_computed = k / double(grid.size());
        r.kernel_theta_quoted = 0.5 * t0;
    }
    return r;
}

struct Lemma21Result {
    double lhs = 0, rhs = 0, residual = 0;  // residual relative to max(|lhs|, tiny) unless both vanish
    double distance = 0;                    // the domain is {geodesic distance from the inner boundary <= distance}
};

// d/dt vol_{g_t}(D) against -(2/s) int_{dD} (2H' + <A,h>), s = -12.
// The family is identified in Fermi coordinates about the inner boundary (geodesic
// distance and fixed angular coordinates, periodic directions rescaled), so h has no
// normal components and H' is the derivative of tr A at fixed coordinates.
inline Lemma21Result lemma21_check(const Family& fam, const BoundaryGrid& grid, double rho_at_boundary,
                                   const VariationOptions& o = {}) {
    using Real = long double;
    const double t0 = fam.value();
    const RadialChartMetric base = fam.at(t0);
    auto nf0 = to_normal_form(base, o.normal_form);
    Lemma21Result res;
    const Real S = nf0->log_c_x() - std::log(Real(rho_at_boundary));
    res.distance = double(S);
    const long double ang0 = unit_boundary_volume(base, grid);

    struct Member {
        NormalForm nf;
        Real R;
        Vec3 sc;
    };
    auto member = [&](double t) {
        Member mb;
        mb.nf = to_normal_form(fam.at(t), o.normal_form);
        mb.R = mb.nf->r_at_distance(S);
        mb.sc = detail::periodic_scale(mb.nf->chart(), base);
        return mb;
    };
    auto block_scale = [](const RadialChartMetric& m, std::size_t i, const Vec3& sc) {
        switch (m.blocks[i].kind) {
            case BlockKind::Circle: return Real(sc[2]) * sc[2];
            case BlockKind::T3: return Real(sc[0]) * sc[0];
            default: return Real(1);
        }
    };
    auto volume = [&](double t) {
        Member mb = member(t);
        const auto& m = mb.nf->chart();
        Real stretch = Real(mb.sc[0]) * mb.sc[1] * mb.sc[2];
        return double(ang0 * stretch * radial_integral<Real>(m, mb.R, [&](Real x) { return radial_density<Real>(m, x); }));
    };
    // 1/2 d/ds log A_i at the boundary, s the geodesic distance
    auto half_dlog = [](const RadialChartMetric& m, std::size_t i, Real R) {
        auto a = m.A(i, Dual<Real, 1>::variable(R, 0));
        return a.d[0] / a.v / (2 * std::sqrt(m.U(R)));
    };
    auto mean_curvature = [&](double t) {
        Member mb = member(t);
        const auto& m = mb.nf->chart();
        Real H = 0;
        for (std::size_t i = 0; i < m.blocks.size(); ++i) H += block_dimension(m.blocks[i].kind) * half_dlog(m, i, mb.R);
        return double(H);
    };
    auto log_block = [&](double t) {
        Member mb = member(t);
        const auto& m = mb.nf->chart();
        std::vector<double> out;
        for (std::size_t i = 0; i < m.blocks.size(); ++i)
            out.push_back(double(std::log(m.A(i, mb.R) * block_scale(m, i, mb.sc))));
        return Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(out.data(), long(out.size())));
    };
    const double h = parameter_step(t0, o.relative_step);
    res.lhs = fd_derivative(volume, t0, h);
    double dH = fd_derivative(mean_curvature, t0, h);
    Eigen::VectorXd dlog = fd_derivative(log_block, t0, h);

    Member mb0 = member(t0);
    const auto& m0 = mb0.nf->chart();
    Real area = ang0, A_dot_h = 0;
    for (std::size_t i = 0; i < m0.blocks.size(); ++i) {
        int d = block_dimension(m0.blocks[i].kind);
        area *= std::pow(m0.A(i, mb0.R), Real(d) / 2);
        // A = (1/2) d_s g^T per block, h^T = (d/dt log a_i) a_i h_i: contraction is d_i * (1/2 d_s log A_i) * d/dt log a_i
        A_dot_h += d * half_dlog(m0, i, mb0.R) * dlog(long(i));
    }
    const double s = -12;
    res.rhs = double(-(2 / Real(s)) * area * (2 * dH + A_dot_h));
    double scale = std::max(std::abs(res.lhs), std::abs(res.rhs));
    res.residual = scale < 1e-12 ? std::abs(res.lhs - res.rhs) : std::abs(res.lhs - res.rhs) / std::max(std::abs(res.lhs), 1e-300);
    return res;
}

struct PMDecomposition {
    // "regular", "trivial" (both functionals vanish), "dWplus_zero", "dWminus_zero",
    // "dEta_zero" (conformally flat: not applicable), "dW_zero", "proportional"
    std::string status;
    bool applicable = false;
    std::vector<Eigen::VectorXd> plus, zero, minus;  // coefficients in the span of the input variations
    std::vector<TensorField> plus_fields, zero_fields, minus_fields;
    double resum_residual = 0;  // max |h - (h+ + h0 + h-)| on the grid
    double split_identity_residual = 0;  // max |dW(h) - (1/2)<C,h+> + (1/2)<C,h->|
    double kernel_residual = 0; // max |dW-(h+)|, |dW+(h-)|, |dW+-(h0)|
};

// Finite-span version of the decomposition h = h+ + h0 + h-, with h+ in ker dW-,
// h- in ker dW+, h0 in both. Complements are the L2(gamma)-orthogonal ones.
inline PMDecomposition pm_decomposition(const std::vector<double>& dWplus, const std::vector<double>& dWminus,
                                        const std::vector<TensorField>& variations, const BoundaryGeometry& bg) {
    const long n = long(variations.size());
    if (n < 3) throw Error("variation", "pm_decomposition needs at least 3 variations");
    if (long(dWplus.size()) != n || long(dWminus.size()) != n)
        throw Error("variation", "functional values must be given on every variation");
    if (bg.cotton.empty()) throw Error("variation", "Cotton-York tensor not computed on this geometry");
    Eigen::MatrixXd G(n, n);
    for (long i = 0; i < n; ++i)
        for (long j = i; j < n; ++j) G(i, j) = G(j, i) = pair_integrate(variations[i], variations[j], bg);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    if (es.eigenvalues().minCoeff() <= 1e-12 * es.eigenvalues().maxCoeff())
        throw Error("variation", "variations are not linearly independent");
    Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(dWplus.data(), n);
    Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(dWminus.data(), n);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
    Eigen::VectorXd ar = ldlt.solve(a), br = ldlt.solve(b);  // Riesz representers
    double aa = a.dot(ar), bb = b.dot(br), ab = a.dot(br);
    double na = std::sqrt(std::max(aa, 0.0)), nb = std::sqrt(std::max(bb, 0.0));
    const double zero_tol = 1e-10 * std::max(1.0, std::max(na, nb));

    PMDecomposition d;
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n), q = Eigen::VectorXd::Zero(n);  // directions of h+ and h-
    if (na <= zero_tol && nb <= zero_tol) {
        d.status = "trivial";
        d.applicable = true;
    } else if (nb <= zero_tol) {
        d.status = "dWminus_zero";  // h- = 0 by convention
        d.applicable = true;
        p = ar;
    } else if (na <= zero_tol) {
        d.status = "dWplus_zero";
        d.applicable = true;
        q = br;
    } else if (aa * bb - ab * ab > 1e-10 * aa * bb) {
        d.status = "regular";
        d.applicable = true;
        p = ar - (b.dot(ar) / bb) * br;
        q = br - (a.dot(br) / aa) * ar;
    } else {
        // dW+ and dW- proportional on the span
        double lambda = ab / bb;
        d.status = std::abs(lambda - 1) < 1e-8 ? "dEta_zero" : std::abs(lambda + 1) < 1e-8 ? "dW_zero" : "proportional";
        d.applicable = false;
    }
    for (long k = 0; k < n; ++k) {
        Eigen::VectorXd e = Eigen::VectorXd::Unit(n, k), hp = Eigen::VectorXd::Zero(n), hm = hp;
        if (d.applicable) {
            if (p.squaredNorm() > 0) hp = (a(k) / a.dot(p)) * p;
            if (q.squaredNorm() > 0) hm = (b(k) / b.dot(q)) * q;
        } else {
            // one-functional case: the part outside ker dW is shared equally
            Eigen::VectorXd w = ldlt.solve(a + b);
            double ww = (a + b).dot(w);
            if (ww > 0) hp = hm = 0.5 * ((a(k) + b(k)) / ww) * w;
        }
        d.plus.push_back(hp);
        d.minus.push_back(hm);
        d.zero.push_back(e - hp - hm);
    }
    auto field = [&](const Eigen::VectorXd& c) {
        TensorField f(bg.grid->size(), zero_mat<double, 3>());
        for (long j = 0; j < n; ++j)
            for (std::size_t i = 0; i < f.size(); ++i)
                for (int x = 0; x < 3; ++x)
                    for (int y = 0; y < 3; ++y) f[i][x][y] += c(j) * variations[std::size_t(j)][i][x][y];
        return f;
    };
    Eigen::VectorXd cot(n);
    for (long j = 0; j < n; ++j) cot(j) = pair_integrate(bg.cotton, variations[std::size_t(j)], bg);
    for (long k = 0; k < n; ++k) {
        d.plus_fields.push_back(field(d.plus[std::size_t(k)]));
        d.zero_fields.push_back(field(d.zero[std::size_t(k)]));
        d.minus_fields.push_back(field(d.minus[std::size_t(k)]));
        const auto& h = variations[std::size_t(k)];
        for (std::size_t i = 0; i < h.size(); ++i)
            for (int x = 0; x < 3; ++x)
                for (int y = 0; y < 3; ++y)
                    d.resum_residual = std::max(d.resum_residual,
                                                std::abs(h[i][x][y] - d.plus_fields.back()[i][x][y] -
                                                         d.zero_fields.back()[i][x][y] - d.minus_fields.back()[i][x][y]));
        if (d.applicable) {
            double dW = a(k) + b(k);
            double rhs = 0.5 * cot.dot(d.plus[std::size_t(k)]) - 0.5 * cot.dot(d.minus[std::size_t(k)]);
            d.split_identity_residual = std::max(d.split_identity_residual, std::abs(dW - rhs));
            d.kernel_residual = std::max({d.kernel_residual, std::abs(b.dot(d.plus[std::size_t(k)])),
                                          std::abs(a.dot(d.minus[std::size_t(k)])), std::abs(a.dot(d.zero[std::size_t(k)])),
                                          std::abs(b.dot(d.zero[std::size_t(k)]))});
        }
    }
    return d;
}

}  // namespace ahe
