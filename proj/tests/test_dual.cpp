#include <gtest/gtest.h>

#include <cmath>

#include "ahe/dual.hpp"

using namespace ahe;

TEST(Dual, ElementaryDerivatives) {
    const double x = 0.7;
    auto X = D1<1>::variable(x, 0);
    EXPECT_NEAR(exp(X).d[0], std::exp(x), 1e-15);
    EXPECT_NEAR(log(X).d[0], 1 / x, 1e-15);
    EXPECT_NEAR(sqrt(X).d[0], 0.5 / std::sqrt(x), 1e-15);
    EXPECT_NEAR(sinh(X).d[0], std::cosh(x), 1e-15);
    EXPECT_NEAR(cosh(X).d[0], std::sinh(x), 1e-15);
    EXPECT_NEAR(sin(X).d[0], std::cos(x), 1e-15);
    EXPECT_NEAR(cos(X).d[0], -std::sin(x), 1e-15);
    EXPECT_NEAR(pow(X, 2.5).d[0], 2.5 * std::pow(x, 1.5), 1e-14);
    EXPECT_NEAR((X / (1.0 + X * X)).d[0], (1 - x * x) / std::pow(1 + x * x, 2), 1e-15);
}

TEST(Dual, PartialDerivativesOfTwoVariables) {
    auto v = seed<double, 2>({1.2, -0.4});
    auto f = v[0] * v[0] * v[1] + exp(v[1]);
    EXPECT_DOUBLE_EQ(f.v, 1.44 * -0.4 + std::exp(-0.4));
    EXPECT_NEAR(f.d[0], 2 * 1.2 * -0.4, 1e-15);
    EXPECT_NEAR(f.d[1], 1.44 + std::exp(-0.4), 1e-15);
}

TEST(Dual, NestedSecondDerivatives) {
    auto v = seed2<double, 2>({0.3, 0.8});
    auto f = sinh(v[0] * v[1]);
    const double a = 0.3, b = 0.8, u = a * b;
    EXPECT_NEAR(f.v.v, std::sinh(u), 1e-15);
    EXPECT_NEAR(f.d[0].d[0], b * b * std::sinh(u), 1e-14);
    EXPECT_NEAR(f.d[0].d[1], std::cosh(u) + u * std::sinh(u), 1e-14);
    EXPECT_NEAR(f.d[1].d[0], f.d[0].d[1], 1e-15);
}

TEST(Dual, IntegerPowerMatchesRepeatedProduct) {
    auto X = D1<1>::variable(1.3, 0);
    auto p = ipow(X, 5);
    EXPECT_NEAR(p.v, std::pow(1.3, 5), 1e-13);
    EXPECT_NEAR(p.d[0], 5 * std::pow(1.3, 4), 1e-13);
    auto q = ipow(X, -2);
    EXPECT_NEAR(q.d[0], -2 * std::pow(1.3, -3), 1e-14);
    EXPECT_DOUBLE_EQ(ipow(2.0, 0), 1.0);
}

TEST(Dual, FourthOrderJetOfExponential) {
    // d^4/dx^4 exp(2x) = 16 exp(2x)
    D4<1> x;
    x.v.v.v.v = 0.1;
    x.v.v.v.d[0] = 1;
    x.v.v.d[0].v = 1;
    x.v.d[0].v.v = 1;
    x.d[0].v.v.v = 1;
    auto f = exp(x * 2.0);
    EXPECT_NEAR(f.d[0].d[0].d[0].d[0], 16 * std::exp(0.2), 1e-12);
}
