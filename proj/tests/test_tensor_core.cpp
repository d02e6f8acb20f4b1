#include <gtest/gtest.h>

#include <cmath>

#include "ahe/tensor_core.hpp"

using namespace ahe;

namespace {

// unit-curvature hyperbolic ball
auto hyperbolic_ball = [](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    S r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3];
    S c = S(4.0) / ((S(1.0) - r2) * (S(1.0) - r2));
    Mat<S, 4> g = zero_mat<S, 4>();
    for (int i = 0; i < 4; ++i) g[i][i] = c;
    return g;
};

// Euclidean Schwarzschild, mass 1, coordinates (tau, r, theta, phi)
auto schwarzschild = [](const auto& x) {
    using S = std::decay_t<decltype(x[0])>;
    using std::sin;
    S f = S(1.0) - S(2.0) / x[1];
    S s = sin(x[2]);
    Mat<S, 4> g = zero_mat<S, 4>();
    g[0][0] = f;
    g[1][1] = S(1.0) / f;
    g[2][2] = x[1] * x[1];
    g[3][3] = x[1] * x[1] * s * s;
    return g;
};

double max_diff(const Rank4<double, 4>& a, const Rank4<double, 4>& b) {
    double m = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k)
                for (int l = 0; l < 4; ++l) m = std::max(m, std::abs(a(i, j, k, l) - b(i, j, k, l)));
    return m;
}

}  // namespace

TEST(TensorCore, SelfTestPasses) { EXPECT_NO_THROW(self_test()); }

TEST(TensorCore, HyperbolicBallIsConstantCurvature) {
    Vec4 x{0.2, -0.1, 0.3, 0.05};
    auto p = curvature_ad(hyperbolic_ball, x);
    auto g = hyperbolic_ball(x);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) EXPECT_NEAR(p.ric[a][b], -3 * g[a][b], 1e-10);
    EXPECT_NEAR(p.s, -12, 1e-10);
    auto kn = kulkarni_nomizu(g, g);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c)
                for (int d = 0; d < 4; ++d) EXPECT_NEAR(p.riem(a, b, c, d), -0.5 * kn(a, b, c, d), 1e-9);
    EXPECT_LT(max_abs(p.weyl), 1e-9);
    EXPECT_LT(riemann_symmetry_residual(p.riem), 1e-10);
}

TEST(TensorCore, SchwarzschildWeylNorms) {
    // Ricci flat with |Riem|^2 = 48 M^2/r^6 in the full contraction; the Lambda^2 norm is a quarter,
    // split evenly between the two halves.
    const double r = 5;
    Vec4 x{0.3, r, 1.0, 0.4};
    auto p = curvature_ad(schwarzschild, x);
    auto g = schwarzschild(x);
    EXPECT_LT(max_abs(p.ric), 1e-12);
    EXPECT_NEAR(lambda2_norm_sq(p.weyl, g), 12 / std::pow(r, 6), 1e-15);
    EXPECT_NEAR(lambda2_norm_sq(p.weyl_plus, g), 6 / std::pow(r, 6), 1e-15);
    EXPECT_NEAR(lambda2_norm_sq(p.weyl_minus, g), 6 / std::pow(r, 6), 1e-15);
}

TEST(TensorCore, SelfDualSplitProperties) {
    Vec4 x{0.3, 4.0, 0.8, 0.4};
    auto g = schwarzschild(x);
    auto p = curvature_ad(schwarzschild, x, 1);
    auto q = curvature_ad(schwarzschild, x, -1);
    Rank4<double, 4> sum;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c)
                for (int d = 0; d < 4; ++d) sum(a, b, c, d) = p.weyl_plus(a, b, c, d) + p.weyl_minus(a, b, c, d);
    EXPECT_LT(max_diff(sum, p.weyl), 1e-14);
    EXPECT_LT(max_diff(hodge_star(p.weyl_plus, g, 1), p.weyl_plus), 1e-13);
    Rank4<double, 4> neg = hodge_star(p.weyl_minus, g, 1);
    for (auto& v : neg.a) v = -v;
    EXPECT_LT(max_diff(neg, p.weyl_minus), 1e-13);
    // reversing the orientation swaps the halves
    EXPECT_LT(max_diff(p.weyl_plus, q.weyl_minus), 1e-14);
    EXPECT_LT(max_diff(p.weyl_minus, q.weyl_plus), 1e-14);
}

TEST(TensorCore, FiniteDifferenceRouteAgreesWithDualRoute) {
    Vec4 x{0.3, 5.0, 1.1, 0.4};
    auto ad = curvature_ad(schwarzschild, x);
    MetricPoint pt{x, schwarzschild(x), 1};
    auto fd = curvature_at([](const Vec4& y) { return schwarzschild(y); }, pt, 1e-3);
    // second differences at h = 1e-3 round at eps |g| / h^2
    const double scale = max_abs(ad.riem);
    EXPECT_LT(max_diff(ad.riem, fd.riem), 1e-8 * scale);
    EXPECT_LT(max_diff(ad.weyl_plus, fd.weyl_plus), 1e-8 * scale);
}

TEST(TensorCore, FiniteDifferenceErrorIsFourthOrder) {
    Vec4 x{0.2, -0.1, 0.3, 0.05};
    auto exact = curvature_ad(hyperbolic_ball, x);
    MetricPoint pt{x, hyperbolic_ball(x), 1};
    auto f = [](const Vec4& y) { return hyperbolic_ball(y); };
    double e1 = max_diff(curvature_at(f, pt, 2e-2, {false}).riem, exact.riem);
    double e2 = max_diff(curvature_at(f, pt, 1e-2, {false}).riem, exact.riem);
    EXPECT_GT(e1 / e2, 12.0);
    EXPECT_LT(e1 / e2, 20.0);
}

TEST(TensorCore, Errors) {
    auto degenerate = [](const auto& x) {
        using S = std::decay_t<decltype(x[0])>;
        Mat<S, 4> g = identity_mat<S, 4>();
        g[3][3] = S(-1.0);
        return g;
    };
    Vec4 x{0, 0, 0, 0};
    EXPECT_THROW(curvature_ad(degenerate, x), DegenerateMetric);
    MetricPoint pt{x, identity_mat<double, 4>(), 1};
    EXPECT_THROW(curvature_at([](const Vec4&) { return identity_mat<double, 4>(); }, pt, 0.0), DomainError);
}

TEST(TensorCore, FieldWrapperEvaluatesAllJetOrders) {
    auto field = make_field<4>(hyperbolic_ball);
    Vec4 x{0.1, 0.2, 0.0, -0.1};
    auto c = curvature_jet<4>(*field, x);
    EXPECT_NEAR(c.s, -12, 1e-10);
    auto j = curvature_jet<4>(*field, seed<double, 4>(x));  // curvature with first derivatives
    EXPECT_NEAR(j.s.v, -12, 1e-10);
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(j.s.d[k], 0, 1e-8);
}
