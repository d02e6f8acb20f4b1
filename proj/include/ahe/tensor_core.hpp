#pragma once
// Pointwise curvature of a metric field in dimension 3 or 4.
//
// Conventions (checked at startup by self_test()):
//   R_iklm = 1/2 (g_im,kl + g_kl,im - g_il,km - g_km,il)
//            + g_np (G^n_kl G^p_im - G^n_km G^p_il)
//   so R_abab = K(a,b), Ric_km = g^il R_iklm, and H^4(-1) has Ric = -3g.
//   (h ^ k)_abcd = h_ac k_bd + h_bd k_ac - h_ad k_bc - h_bc k_ad
//   |T|^2 = 1/4 T_abcd T^abcd (norm as an operator on 2-forms).
//   (*T)_abcd = 1/2 eps_ab^ef T_efcd,  eps_0123 = orientation * sqrt(det g).

#include <Eigen/Cholesky>
#include <functional>
#include <memory>
#include <utility>

#include "ahe/dual.hpp"
#include "ahe/error.hpp"
#include "ahe/tensor.hpp"

namespace ahe {

// A metric field that can be evaluated on plain points and on jets up to order 4.
template <std::size_t N>
class MetricField {
public:
    virtual ~MetricField() = default;
    virtual Mat<double, N> operator()(const Vec<double, N>& x) const = 0;
    virtual Mat<D1<N>, N> operator()(const Vec<D1<N>, N>& x) const = 0;
    virtual Mat<D2<N>, N> operator()(const Vec<D2<N>, N>& x) const = 0;
    virtual Mat<D3<N>, N> operator()(const Vec<D3<N>, N>& x) const = 0;
    virtual Mat<D4<N>, N> operator()(const Vec<D4<N>, N>& x) const = 0;
};

template <int N, class F>
class LambdaField final : public MetricField<N> {
public:
    explicit LambdaField(F f) : f_(std::move(f)) {}
    Mat<double, N> operator()(const Vec<double, N>& x) const override { return f_(x); }
    Mat<D1<N>, N> operator()(const Vec<D1<N>, N>& x) const override { return f_(x); }
    Mat<D2<N>, N> operator()(const Vec<D2<N>, N>& x) const override { return f_(x); }
    Mat<D3<N>, N> operator()(const Vec<D3<N>, N>& x) const override { return f_(x); }
    Mat<D4<N>, N> operator()(const Vec<D4<N>, N>& x) const override { return f_(x); }

private:
    F f_;
};

// Wrap a generic lambda `[](const auto& x) -> Mat<S,N>` as a shared field.
template <int N, class F>
std::shared_ptr<const MetricField<N>> make_field(F f) {
    return std::make_shared<LambdaField<N, F>>(std::move(f));
}

template <class T, std::size_t N>
struct MetricJet {
    Mat<T, N> g;
    std::array<Mat<T, N>, N> dg;                   // dg[k] = d_k g
    std::array<std::array<Mat<T, N>, N>, N> ddg;  // ddg[k][l] = d_k d_l g
};

// Second-order jet of `f` at a point of scalar type T.
template <int N, class T, class F>
MetricJet<T, N> metric_jet(const F& f, const Vec<T, N>& x) {
    auto X = seed2<T, N>(x);
    auto G = f(X);
    MetricJet<T, N> j;
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) {
            j.g[a][b] = G[a][b].v.v;
            for (int k = 0; k < N; ++k) {
                j.dg[k][a][b] = G[a][b].v.d[k];
                for (int l = 0; l < N; ++l) j.ddg[k][l][a][b] = G[a][b].d[k].d[l];
            }
        }
    return j;
}

template <class T, std::size_t N>
struct Curvature {
    Mat<T, N> g, ginv;
    std::array<Mat<T, N>, N> gamma;  // gamma[k][i][j] = G^k_ij
    Rank4<T, N> riem;
    Mat<T, N> ric;
    T s{};
    Mat<T, N> z;
};

template <class T, std::size_t N>
Curvature<T, N> curvature_from_jet(const MetricJet<T, N>& j) {
    Curvature<T, N> c;
    c.g = j.g;
    c.ginv = inverse(j.g);
    const auto& gi = c.ginv;
    std::array<Mat<T, N>, N> gl;  // gl[m][i][j] = G_mij
    for (int m = 0; m < N; ++m)
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b)
                gl[m][a][b] = T(0.5) * (j.dg[a][m][b] + j.dg[b][m][a] - j.dg[m][a][b]);
    for (int k = 0; k < N; ++k)
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b) {
                T s(0.0);
                for (int m = 0; m < N; ++m) s = s + gi[k][m] * gl[m][a][b];
                c.gamma[k][a][b] = s;
            }
    for (int i = 0; i < N; ++i)
        for (int k = 0; k < N; ++k)
            for (int l = 0; l < N; ++l)
                for (int m = 0; m < N; ++m) {
                    T r = T(0.5) * (j.ddg[k][l][i][m] + j.ddg[i][m][k][l] - j.ddg[k][m][i][l] - j.ddg[i][l][k][m]);
                    // g_np G^n_kl G^p_im = G_pkl G^p_im
                    for (int p = 0; p < N; ++p)
                        r = r + gl[p][k][l] * c.gamma[p][i][m] - gl[p][k][m] * c.gamma[p][i][l];
                    c.riem(i, k, l, m) = r;
                }
    for (int k = 0; k < N; ++k)
        for (int m = 0; m < N; ++m) {
            T r(0.0);
            for (int i = 0; i < N; ++i)
                for (int l = 0; l < N; ++l) r = r + gi[i][l] * c.riem(i, k, l, m);
            c.ric[k][m] = r;
        }
    c.s = trace(c.ric, gi);
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) c.z[a][b] = c.ric[a][b] - c.s / T(double(N)) * c.g[a][b];
    return c;
}

template <int N, class T, class F>
Curvature<T, N> curvature_jet(const F& f, const Vec<T, N>& x) {
    return curvature_from_jet(metric_jet<N>(f, x));
}

template <class T, std::size_t N>
Rank4<T, N> kulkarni_nomizu(const Mat<T, N>& h, const Mat<T, N>& k) {
    Rank4<T, N> r;
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b)
            for (int c = 0; c < N; ++c)
                for (int d = 0; d < N; ++d)
                    r(a, b, c, d) = h[a][c] * k[b][d] + h[b][d] * k[a][c] - h[a][d] * k[b][c] - h[b][c] * k[a][d];
    return r;
}

// raise all four indices
template <class T, std::size_t N>
Rank4<T, N> raise_all(const Rank4<T, N>& t, const Mat<T, N>& gi) {
    Rank4<T, N> a = t, b;
    // contract one slot at a time
    for (int slot = 0; slot < 4; ++slot) {
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                for (int k = 0; k < N; ++k)
                    for (int l = 0; l < N; ++l) {
                        T s(0.0);
                        int idx[4] = {i, j, k, l};
                        for (int m = 0; m < N; ++m) {
                            int jdx[4] = {i, j, k, l};
                            jdx[slot] = m;
                            s = s + gi[idx[slot]][m] * a(jdx[0], jdx[1], jdx[2], jdx[3]);
                        }
                        b(i, j, k, l) = s;
                    }
        a = b;
    }
    return a;
}

template <class T, std::size_t N>
T lambda2_norm_sq(const Rank4<T, N>& t, const Mat<T, N>& g) {
    Mat<T, N> gi = inverse(g);
    Rank4<T, N> up = raise_all(t, gi);
    T s(0.0);
    for (std::size_t i = 0; i < t.a.size(); ++i) s = s + t.a[i] * up.a[i];
    return T(0.25) * s;
}

template <class T>
Rank4<T, 4> weyl_tensor(const Rank4<T, 4>& riem, const Mat<T, 4>& ric, const T& s, const Mat<T, 4>& g) {
    Mat<T, 4> p;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) p[a][b] = T(0.5) * (ric[a][b] - s / T(6.0) * g[a][b]);
    Rank4<T, 4> pg = kulkarni_nomizu(p, g);
    Rank4<T, 4> w;
    for (std::size_t i = 0; i < w.a.size(); ++i) w.a[i] = riem.a[i] - pg.a[i];
    return w;
}

template <class T>
Rank4<T, 4> hodge_star(const Rank4<T, 4>& t, const Mat<T, 4>& g, int orientation) {
    using std::sqrt;
    Mat<T, 4> gi = inverse(g);
    T vol = T(double(orientation)) * sqrt(determinant(g));
    // eps_ab^ef
    Rank4<T, 4> eps_up;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int e = 0; e < 4; ++e)
                for (int f = 0; f < 4; ++f) {
                    T s(0.0);
                    for (int c = 0; c < 4; ++c)
                        for (int d = 0; d < 4; ++d) {
                            int lv = levi4(a, b, c, d);
                            if (lv) s = s + T(double(lv)) * gi[c][e] * gi[d][f];
                        }
                    eps_up(a, b, e, f) = vol * s;
                }
    Rank4<T, 4> r;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c)
                for (int d = 0; d < 4; ++d) {
                    T s(0.0);
                    for (int e = 0; e < 4; ++e)
                        for (int f = 0; f < 4; ++f) s = s + eps_up(a, b, e, f) * t(e, f, c, d);
                    r(a, b, c, d) = T(0.5) * s;
                }
    return r;
}

template <class T>
std::pair<Rank4<T, 4>, Rank4<T, 4>> selfdual_split(const Rank4<T, 4>& w, const Mat<T, 4>& g, int orientation) {
    Rank4<T, 4> st = hodge_star(w, g, orientation);
    Rank4<T, 4> p, m;
    for (std::size_t i = 0; i < w.a.size(); ++i) {
        p.a[i] = T(0.5) * (w.a[i] + st.a[i]);
        m.a[i] = T(0.5) * (w.a[i] - st.a[i]);
    }
    return {p, m};
}

struct MetricPoint {
    Vec4 coords{};
    Mat4 g{};
    int orientation = 1;
};

struct CurvaturePack {
    std::array<Mat4, 4> gamma{};
    Rank4<double, 4> riem;
    Mat4 ric{};
    double s = 0;
    Rank4<double, 4> weyl, weyl_plus, weyl_minus;
    Mat4 z{};
};

template <std::size_t N>
void require_positive_definite(const Mat<double, N>& g, const char* module) {
    Eigen::Matrix<double, N, N> m;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            if (!std::isfinite(g[i][j])) throw DegenerateMetric(module, "non-finite metric component");
            m(i, j) = g[i][j];
        }
    if (asymmetry(g) > 1e-12 * (1.0 + max_abs(g))) throw DegenerateMetric(module, "metric is not symmetric");
    Eigen::LLT<Eigen::Matrix<double, N, N>> llt(m);
    if (llt.info() != Eigen::Success) throw DegenerateMetric(module, "metric is not positive definite");
}

inline CurvaturePack pack_from(const Curvature<double, 4>& c, int orientation) {
    CurvaturePack p;
    p.gamma = c.gamma;
    p.riem = c.riem;
    p.ric = c.ric;
    p.s = c.s;
    p.z = c.z;
    p.weyl = weyl_tensor(c.riem, c.ric, c.s, c.g);
    auto [wp, wm] = selfdual_split(p.weyl, c.g, orientation);
    p.weyl_plus = wp;
    p.weyl_minus = wm;
    return p;
}

// Exact derivatives by nested dual numbers.
template <class F>
CurvaturePack curvature_ad(const F& f, const Vec4& x, int orientation = 1) {
    auto c = curvature_jet<4>(f, x);
    require_positive_definite<4>(c.g, "tensor_core");
    return pack_from(c, orientation);
}

struct FdOptions {
    bool richardson = true;
};

namespace detail {

// 4th-order central estimates of first and second derivatives with steps h[k]
template <class F>
MetricJet<double, 4> fd_jet(const F& f, const Vec4& x, const Vec4& h) {
    static constexpr int off[4] = {-2, -1, 1, 2};
    static constexpr double c1[4] = {1.0 / 12, -8.0 / 12, 8.0 / 12, -1.0 / 12};
    auto eval = [&](const Vec4& p) {
        Mat4 g = f(p);
        require_positive_definite<4>(g, "tensor_core");
        return g;
    };
    MetricJet<double, 4> j;
    j.g = eval(x);
    std::array<std::array<Mat4, 4>, 4> side;  // side[k][o] = f(x + off[o] h_k e_k)
    for (int k = 0; k < 4; ++k)
        for (int o = 0; o < 4; ++o) {
            Vec4 p = x;
            p[k] += off[o] * h[k];
            side[k][o] = eval(p);
        }
    for (int k = 0; k < 4; ++k)
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                double d = 0;
                for (int o = 0; o < 4; ++o) d += c1[o] * side[k][o][a][b];
                j.dg[k][a][b] = d / h[k];
                double dd = (-side[k][0][a][b] + 16 * side[k][1][a][b] - 30 * j.g[a][b] + 16 * side[k][2][a][b] -
                             side[k][3][a][b]) /
                            (12 * h[k] * h[k]);
                j.ddg[k][k][a][b] = dd;
            }
    for (int k = 0; k < 4; ++k)
        for (int l = k + 1; l < 4; ++l) {
            Mat4 acc = zero_mat<double, 4>();
            for (int o = 0; o < 4; ++o)
                for (int q = 0; q < 4; ++q) {
                    Vec4 p = x;
                    p[k] += off[o] * h[k];
                    p[l] += off[q] * h[l];
                    Mat4 g = eval(p);
                    for (int a = 0; a < 4; ++a)
                        for (int b = 0; b < 4; ++b) acc[a][b] += c1[o] * c1[q] * g[a][b];
                }
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) j.ddg[k][l][a][b] = j.ddg[l][k][a][b] = acc[a][b] / (h[k] * h[l]);
        }
    return j;
}

}  // namespace detail

// Finite-difference curvature: 4th-order central stencils with per-coordinate
// steps step*max(1,|x_k|), optionally one Richardson level (h and h/2).
// `f` maps a Vec4 to a Mat4 and may throw DomainError outside its chart.
template <class F>
CurvaturePack curvature_at(const F& f, const MetricPoint& pt, double step, FdOptions opt = {}) {
    if (!(step > 0)) throw DomainError("tensor_core", "finite-difference step must be positive");
    Vec4 h;
    for (int k = 0; k < 4; ++k) h[k] = step * std::max(1.0, std::abs(pt.coords[k]));
    auto j = detail::fd_jet(f, pt.coords, h);
    if (opt.richardson) {
        Vec4 h2;
        for (int k = 0; k < 4; ++k) h2[k] = 0.5 * h[k];
        auto j2 = detail::fd_jet(f, pt.coords, h2);
        for (int k = 0; k < 4; ++k)
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) {
                    j.dg[k][a][b] = (16 * j2.dg[k][a][b] - j.dg[k][a][b]) / 15;
                    for (int l = 0; l < 4; ++l) j.ddg[k][l][a][b] = (16 * j2.ddg[k][l][a][b] - j.ddg[k][l][a][b]) / 15;
                }
    }
    return pack_from(curvature_from_jet(j), pt.orientation);
}

// Largest violation of antisymmetry, pair symmetry and first Bianchi.
inline double riemann_symmetry_residual(const Rank4<double, 4>& r) {
    double m = 0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c)
                for (int d = 0; d < 4; ++d) {
                    m = std::max(m, std::abs(r(a, b, c, d) + r(b, a, c, d)));
                    m = std::max(m, std::abs(r(a, b, c, d) + r(a, b, d, c)));
                    m = std::max(m, std::abs(r(a, b, c, d) - r(c, d, a, b)));
                    m = std::max(m, std::abs(r(a, b, c, d) + r(a, c, d, b) + r(a, d, b, c)));
                }
    return m;
}

// Startup check of the sign conventions on the unit-radius hyperbolic ball model.
inline void self_test() {
    auto hyp = [](const auto& x) {
        using S = std::decay_t<decltype(x[0])>;
        S r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3];
        S c = S(4.0) / ((S(1.0) - r2) * (S(1.0) - r2));
        Mat<S, 4> g = zero_mat<S, 4>();
        for (int i = 0; i < 4; ++i) g[i][i] = c;
        return g;
    };
    Vec4 x{0.1, -0.2, 0.05, 0.3};
    auto c = curvature_jet<4>(hyp, x);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            if (std::abs(c.ric[a][b] + 3.0 * c.g[a][b]) > 1e-9 * (1 + std::abs(c.g[a][b])))
                throw Error("tensor_core", "curvature sign convention self-test failed");
    double k = c.riem(0, 1, 0, 1) / (c.g[0][0] * c.g[1][1]);
    if (std::abs(k + 1.0) > 1e-9) throw Error("tensor_core", "sectional curvature self-test failed");
}

}  // namespace ahe
