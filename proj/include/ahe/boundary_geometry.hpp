#pragma once
// Quadrature grids on the conformal infinity and its intrinsic geometry.

#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "ahe/quadrature.hpp"
#include "ahe/tensor_core.hpp"

namespace ahe {

enum class Topology { S3, S2xS1, T3 };

inline std::string to_string(Topology t) {
    switch (t) {
        case Topology::S3: return "S3";
        case Topology::S2xS1: return "S2xS1";
        case Topology::T3: return "T3";
    }
    return "?";
}

inline Topology topology_from_string(const std::string& s) {
    if (s == "S3") return Topology::S3;
    if (s == "S2xS1") return Topology::S2xS1;
    if (s == "T3") return Topology::T3;
    throw Error("boundary_geometry", "unknown topology '" + s + "'");
}

inline std::array<std::string, 3> coordinate_names(Topology t) {
    switch (t) {
        case Topology::S3: return {"eta", "xi1", "xi2"};
        case Topology::S2xS1: return {"theta", "phi", "psi"};
        case Topology::T3: return {"x1", "x2", "x3"};
    }
    return {};
}

using TensorField = std::vector<Mat3>;
using ScalarField = std::vector<double>;
using BoundaryField = std::shared_ptr<const MetricField<3>>;

// Product grid: Gauss-Legendre in polar coordinates, trapezoid in periodic ones.
// S3 uses Hopf coordinates (eta in (0,pi/2), xi1, xi2 in [0,2pi)),
// S2xS1 uses (theta in (0,pi), phi in [0,2pi), psi in [0,L)), T3 uses [0,L)^3.
struct BoundaryGrid {
    Topology topology = Topology::S3;
    std::array<int, 3> resolution{};
    std::vector<Vec3> nodes;
    std::vector<double> weights;
    std::array<bool, 3> periodic{};
    std::array<double, 3> lower{}, upper{};
    std::optional<double> circle_length;

    std::size_t size() const { return nodes.size(); }
    bool same_layout(const BoundaryGrid& o) const {
        return topology == o.topology && resolution == o.resolution && circle_length == o.circle_length;
    }
};

inline BoundaryGrid make_grid(Topology topology, std::array<int, 3> resolution,
                              std::optional<double> circle_length = std::nullopt) {
    for (int n : resolution)
        if (n < 8) throw Error("boundary_geometry", "resolution must be at least 8 per coordinate");
    const double pi = std::numbers::pi;
    BoundaryGrid g;
    g.topology = topology;
    g.resolution = resolution;
    switch (topology) {
        case Topology::S3:
            if (circle_length) throw Error("boundary_geometry", "circle_length is not used for S3");
            g.periodic = {false, true, true};
            g.lower = {0, 0, 0};
            g.upper = {pi / 2, 2 * pi, 2 * pi};
            break;
        case Topology::S2xS1:
            if (!circle_length) throw Error("boundary_geometry", "circle_length is required for S2xS1");
            if (!(*circle_length > 0)) throw Error("boundary_geometry", "circle_length must be positive");
            g.periodic = {false, true, true};
            g.lower = {0, 0, 0};
            g.upper = {pi, 2 * pi, *circle_length};
            break;
        case Topology::T3:
            if (!circle_length) throw Error("boundary_geometry", "circle_length is required for T3");
            if (!(*circle_length > 0)) throw Error("boundary_geometry", "circle_length must be positive");
            g.periodic = {true, true, true};
            g.lower = {0, 0, 0};
            g.upper = {*circle_length, *circle_length, *circle_length};
            break;
    }
    g.circle_length = circle_length;
    std::array<Rule, 3> rules;
    for (int k = 0; k < 3; ++k) {
        if (g.periodic[k]) {
            double h = (g.upper[k] - g.lower[k]) / resolution[k];
            for (int i = 0; i < resolution[k]; ++i) {
                rules[k].x.push_back(g.lower[k] + i * h);
                rules[k].w.push_back(h);
            }
        } else {
            rules[k] = gauss_legendre(resolution[k], g.lower[k], g.upper[k]);
        }
    }
    for (int i = 0; i < resolution[0]; ++i)
        for (int j = 0; j < resolution[1]; ++j)
            for (int k = 0; k < resolution[2]; ++k) {
                g.nodes.push_back({rules[0].x[i], rules[1].x[j], rules[2].x[k]});
                g.weights.push_back(rules[0].w[i] * rules[1].w[j] * rules[2].w[k]);
            }
    return g;
}

// Model boundary metrics, written over a generic scalar so they can be differentiated.
inline BoundaryField round_s3() {
    return make_field<3>([](const auto& x) {
        using S = std::decay_t<decltype(x[0])>;
        using std::cos;
        using std::sin;
        Mat<S, 3> g = zero_mat<S, 3>();
        S c = cos(x[0]), s = sin(x[0]);
        g[0][0] = S(1.0);
        g[1][1] = c * c;
        g[2][2] = s * s;
        return g;
    });
}

// S^2(1) x S^1 with the circle coefficient `c` (c = 1 gives the unit product)
inline BoundaryField product_s2xs1(double c = 1.0) {
    return make_field<3>([c](const auto& x) {
        using S = std::decay_t<decltype(x[0])>;
        using std::sin;
        Mat<S, 3> g = zero_mat<S, 3>();
        S s = sin(x[0]);
        g[0][0] = S(1.0);
        g[1][1] = s * s;
        g[2][2] = S(c);
        return g;
    });
}

inline BoundaryField flat_t3() {
    return make_field<3>([](const auto& x) {
        using S = std::decay_t<decltype(x[0])>;
        return identity_mat<S, 3>();
    });
}

// Berger sphere: round S^3 plus (lambda^2 - 1) s3 (x) s3 along the Hopf fibre,
// s3 = cos^2(eta) dxi1 + sin^2(eta) dxi2.
inline BoundaryField berger_s3(double lambda) {
    return make_field<3>([lambda](const auto& x) {
        using S = std::decay_t<decltype(x[0])>;
        using std::cos;
        using std::sin;
        Mat<S, 3> g = zero_mat<S, 3>();
        S c = cos(x[0]), s = sin(x[0]);
        S c2 = c * c, s2 = s * s;
        Vec<S, 3> s3{S(0.0), c2, s2};
        g[0][0] = S(1.0);
        g[1][1] = c2;
        g[2][2] = s2;
        for (int i = 1; i < 3; ++i)
            for (int j = 1; j < 3; ++j) g[i][j] = g[i][j] + S(lambda * lambda - 1.0) * s3[i] * s3[j];
        return g;
    });
}

struct BoundaryGeometry {
    std::shared_ptr<const BoundaryGrid> grid;
    BoundaryField field;
    TensorField gamma;
    TensorField ric;
    ScalarField s;
    ScalarField volume_density;
    TensorField cotton;  // filled by cotton_york
};

inline BoundaryGeometry intrinsic_curvature(BoundaryField field, const BoundaryGrid& grid) {
    BoundaryGeometry bg;
    bg.grid = std::make_shared<const BoundaryGrid>(grid);
    bg.field = std::move(field);
    const std::size_t n = grid.size();
    bg.gamma.resize(n);
    bg.ric.resize(n);
    bg.s.resize(n);
    bg.volume_density.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto c = curvature_jet<3>(*bg.field, grid.nodes[i]);
        require_positive_definite<3>(c.g, "boundary_geometry");
        bg.gamma[i] = c.g;
        bg.ric[i] = c.ric;
        bg.s[i] = c.s;
        bg.volume_density[i] = std::sqrt(determinant(c.g));
    }
    return bg;
}

// Schouten tensor P = Ric - (s/4) g at a point of scalar type T.
template <class T>
Mat<T, 3> schouten(const MetricField<3>& f, const Vec<T, 3>& x, Curvature<T, 3>* out = nullptr) {
    auto c = curvature_jet<3>(f, x);
    Mat<T, 3> p;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) p[a][b] = c.ric[a][b] - c.s * T(0.25) * c.g[a][b];
    if (out) *out = c;
    return p;
}

// C_ab = eps_a^cd nabla_c P_db with eps_123 = +sqrt(det g) in chart order.
// Returned before symmetrization so callers can measure the asymmetry.
template <class T>
Mat<T, 3> cotton_raw(const MetricField<3>& f, const Vec<T, 3>& x) {
    using std::sqrt;
    using J = Dual<T, 3>;
    Curvature<J, 3> cj;
    Mat<J, 3> pj = schouten<J>(f, seed<T, 3>(x), &cj);
    Mat<T, 3> g, p;
    std::array<Mat<T, 3>, 3> gam, dp;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            g[a][b] = cj.g[a][b].v;
            p[a][b] = pj[a][b].v;
            for (int k = 0; k < 3; ++k) {
                gam[k][a][b] = cj.gamma[k][a][b].v;
                dp[k][a][b] = pj[a][b].d[k];
            }
        }
    T vol = sqrt(determinant(g));
    // nabla_c P_db
    std::array<Mat<T, 3>, 3> np;
    for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d)
            for (int b = 0; b < 3; ++b) {
                T v = dp[c][d][b];
                for (int k = 0; k < 3; ++k) v = v - gam[k][c][d] * p[k][b] - gam[k][c][b] * p[d][k];
                np[c][d][b] = v;
            }
    Mat<T, 3> out;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            T s(0.0);
            for (int e = 0; e < 3; ++e)
                for (int c = 0; c < 3; ++c)
                    for (int d = 0; d < 3; ++d) {
                        int lv = levi3(e, c, d);
                        if (lv) s = s + T(double(lv)) * g[a][e] * np[c][d][b];
                    }
            out[a][b] = s / vol;
        }
    return out;
}

template <class T>
Mat<T, 3> symmetrize(const Mat<T, 3>& m) {
    Mat<T, 3> r;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) r[a][b] = T(0.5) * (m[a][b] + m[b][a]);
    return r;
}

// Divergence (delta h)_b = g^ac nabla_a h_cb of a symmetric field given as a
// differentiable callable `h(x)` returning Mat<D1<3>,3> at seeded points.
template <class H>
Vec3 divergence(const MetricField<3>& f, const H& h, const Vec3& x) {
    auto c = curvature_jet<3>(f, x);
    Mat<D1<3>, 3> hj = h(seed<double, 3>(x));
    Vec3 out{};
    for (int b = 0; b < 3; ++b) {
        double s = 0;
        for (int a = 0; a < 3; ++a)
            for (int cc = 0; cc < 3; ++cc) {
                double v = hj[cc][b].d[a];
                for (int k = 0; k < 3; ++k)
                    v -= c.gamma[k][a][cc] * hj[k][b].v + c.gamma[k][a][b] * hj[cc][k].v;
                s += c.ginv[a][cc] * v;
            }
        out[b] = s;
    }
    return out;
}

inline double covector_norm(const Vec3& v, const Mat3& ginv) {
    double s = 0;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) s += ginv[a][b] * v[a] * v[b];
    return std::sqrt(std::max(0.0, s));
}

struct CottonResult {
    TensorField values;
    double sup_norm = 0;             // max over nodes of |C|_gamma
    double trace_residual = 0;       // max |tr C|
    double divergence_residual = 0;  // max |delta C|_gamma
    double asymmetry = 0;            // max |C_ab - C_ba| before symmetrization
};

inline CottonResult cotton_york(const BoundaryGeometry& bg) {
    const auto& f = *bg.field;
    const auto& grid = *bg.grid;
    CottonResult r;
    r.values.resize(grid.size());
    auto sym_cotton = [&f](const Vec<D1<3>, 3>& x) { return symmetrize(cotton_raw<D1<3>>(f, x)); };
    for (std::size_t i = 0; i < grid.size(); ++i) {
        Mat3 raw = cotton_raw<double>(f, grid.nodes[i]);
        r.asymmetry = std::max(r.asymmetry, asymmetry(raw));
        Mat3 c = symmetrize(raw);
        r.values[i] = c;
        Mat3 gi = inverse(bg.gamma[i]);
        r.sup_norm = std::max(r.sup_norm, std::sqrt(std::max(0.0, inner(c, c, gi))));
        r.trace_residual = std::max(r.trace_residual, std::abs(trace(c, gi)));
        Vec3 dv = divergence(f, sym_cotton, grid.nodes[i]);
        r.divergence_residual = std::max(r.divergence_residual, covector_norm(dv, gi));
    }
    return r;
}

inline BoundaryGeometry with_cotton(BoundaryGeometry bg) {
    bg.cotton = cotton_york(bg).values;
    return bg;
}

// int <a,b>_gamma dvol_gamma over the grid
inline double pair_integrate(const TensorField& a, const TensorField& b, const BoundaryGeometry& bg) {
    const auto& grid = *bg.grid;
    if (a.size() != grid.size() || b.size() != grid.size())
        throw Error("boundary_geometry", "tensor fields do not live on the geometry's grid");
    long double s = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        Mat3 gi = inverse(bg.gamma[i]);
        s += grid.weights[i] * bg.volume_density[i] * inner(a[i], b[i], gi);
    }
    return double(s);
}

inline double integrate(const ScalarField& f, const BoundaryGeometry& bg) {
    const auto& grid = *bg.grid;
    if (f.size() != grid.size()) throw Error("boundary_geometry", "scalar field does not live on the grid");
    // long accumulator: large grids otherwise lose ~1e-14 relative, which counterterm subtraction amplifies
    long double s = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) s += grid.weights[i] * bg.volume_density[i] * f[i];
    return double(s);
}

inline double volume(const BoundaryGeometry& bg) { return integrate(ScalarField(bg.grid->size(), 1.0), bg); }

}  // namespace ahe
