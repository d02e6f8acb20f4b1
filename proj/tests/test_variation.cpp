#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ahe/variation.hpp"

using namespace ahe;

namespace {

const double pi = std::numbers::pi;
const double pi2 = pi * pi;

Family ads_family(double m) { return Family{"ads_schwarzschild", {{"m", m}}, "m", {}}; }

TensorField scaled(const TensorField& t, double c) {
    TensorField out = t;
    for (auto& m : out)
        for (auto& row : m)
            for (double& v : row) v *= c;
    return out;
}

TensorField berger_derivative(double l, const BoundaryGrid& grid) {
    const double e = 1e-5;
    auto p = intrinsic_curvature(berger_s3(l + e), grid).gamma, m = intrinsic_curvature(berger_s3(l - e), grid).gamma;
    TensorField d(p.size());
    for (std::size_t i = 0; i < p.size(); ++i)
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) d[i][a][b] = (p[i][a][b] - m[i][a][b]) / (2 * e);
    return d;
}

}  // namespace

TEST(Variation, FiniteDifferenceIsFourthOrder) {
    auto f = [](double t) { return std::pow(t, 5); };
    EXPECT_NEAR(fd_derivative(f, 1.0, 1e-2), 5, 1e-8);
    EXPECT_DOUBLE_EQ(parameter_step(0.5), 1e-4);
    EXPECT_DOUBLE_EQ(parameter_step(-3), 3e-4);
}

TEST(Variation, GapAndSplit) {
    EXPECT_DOUBLE_EQ(relative_gap(1, 0.5), 0.5);
    EXPECT_DOUBLE_EQ(relative_gap(1e-4, -1e-4), 2e-2);  // below the floor gaps are absolute
    auto [p, m] = weyl_split(10, 0);
    EXPECT_DOUBLE_EQ(p, 5);
    EXPECT_DOUBLE_EQ(m, 5);
    auto [p2, m2] = weyl_split(0, 1 / (12 * pi2));
    EXPECT_NEAR(p2 - m2, -1, 1e-15);
}

TEST(Variation, AdsSchwarzschildConsistencySquare) {
    auto r = run_variation(ads_family(1), {8, 16, 8}, {}, false);
    // V(m) vanishes at m = 1 with slope -2 pi^2/3
    EXPECT_NEAR(r.dV, -2 * pi2 / 3, 1e-5);
    EXPECT_NEAR(r.dV_fd, r.dV, 1e-4 * std::abs(r.dV));
    EXPECT_LT(std::abs(r.dEta), 1e-10);
    EXPECT_GT(std::abs(r.dV), 0.1);
    // corrected boundary pairings close the square, literal ones are off by exactly 2
    EXPECT_NEAR(r.dV_extrinsic_corrected, r.dV, 1e-4 * std::abs(r.dV));
    EXPECT_NEAR(r.dW_corrected, -6 * r.dV, 1e-4 * std::abs(r.dV));
    EXPECT_NEAR(r.dV_extrinsic, 0.5 * r.dV, 1e-4 * std::abs(r.dV));
    EXPECT_NEAR(-r.dW / 6, 0.5 * r.dV, 1e-4 * std::abs(r.dV));
    EXPECT_NEAR(r.consistency.at("pairing_vs_extrinsic"), 0.5, 1e-4);
    EXPECT_LT(r.consistency.at("pairing_vs_fd"), 1e-4);
    EXPECT_NEAR(r.dW_plus, r.dW_minus, 1e-9);
    ASSERT_TRUE(r.kernel_theta_computed);
    EXPECT_NEAR(*r.kernel_theta_computed, 1.0 / 3, 1e-5);
    EXPECT_DOUBLE_EQ(*r.kernel_theta_quoted, 0.5);
}

TEST(Variation, WeylFiniteDifferenceMatchesPairing) {
    VariationOptions o;
    auto r = run_variation(ads_family(1), {8, 8, 8}, o, true);
    EXPECT_NEAR(-r.dW_fd / 6, r.dV, 1e-3 * std::abs(r.dV));
    EXPECT_LT(r.consistency.at("weyl_fd_vs_pairing"), 1e-3);
}

TEST(Variation, VolumeOfDomainsAgainstBoundaryIntegral) {
    for (auto fam : {ads_family(1), Family{"hyperbolic_quotient", {{"L", 2.0}}, "L", {}}}) {
        auto m = fam.at(fam.value());
        auto res = lemma21_check(fam, make_grid_for(m, {8, 8, 8}), 0.2);
        EXPECT_LT(res.residual, 1e-8) << fam.name;
        EXPECT_GT(std::abs(res.lhs), 1e-3) << fam.name;
    }
}

TEST(Variation, PairingIsGaugeInsensitive) {
    auto fam = ads_family(1);
    auto m = fam.at(1);
    auto nf = to_normal_form(m);
    auto grid = make_grid_for(m, {8, 16, 8});
    auto fg = extract_coefficients(nf, grid);
    auto h0 = boundary_variation(fam, grid);
    double base = dV_pairing(fg.g3, h0, fg.geometry);
    // h0 + phi gamma + L_X gamma with X = sin^2(t) d_t, t the polar angle of the S2 factor
    TensorField h = h0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double t = grid.nodes[i][0], phi = 0.3 * std::cos(t) + 0.2 * std::sin(grid.nodes[i][2]);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) h[i][a][b] += phi * fg.geometry.gamma[i][a][b];
        h[i][0][0] += 4 * std::sin(t) * std::cos(t);
        h[i][1][1] += 2 * std::pow(std::sin(t), 3) * std::cos(t);
    }
    EXPECT_NEAR(dV_pairing(fg.g3, h, fg.geometry), base, 1e-6 * std::abs(base));
}

TEST(Variation, EtaVariation) {
    auto grid = make_grid(Topology::S3, {8, 8, 8});
    auto round = with_cotton(intrinsic_curvature(round_s3(), grid));
    EXPECT_LT(std::abs(d_eta(round, berger_derivative(1.0, grid))), 1e-10);
    // <C, d/dl (l^2 s3^2)> = -16 (1 - l^2) in the orthonormal frame, volume 2 pi^2 l
    for (double l : {0.8, 1.3}) {
        auto bg = with_cotton(intrinsic_curvature(berger_s3(l), grid));
        double expect = 4.0 / 3 * l * (1 - l * l);
        EXPECT_NEAR(std::abs(d_eta(bg, berger_derivative(l, grid))), std::abs(expect), 1e-7) << l;
    }
    EXPECT_THROW(d_eta(intrinsic_curvature(round_s3(), grid), berger_derivative(1.0, grid)), Error);
}

TEST(Variation, SelfDualSplitOfVariations) {
    auto grid = make_grid(Topology::S3, {8, 8, 8});
    auto bg = with_cotton(intrinsic_curvature(berger_s3(0.8), grid));
    std::vector<TensorField> hs{bg.gamma, berger_derivative(0.8, grid), TensorField(grid.size())};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double x = grid.nodes[i][0];
        hs[2][i] = zero_mat<double, 3>();
        hs[2][i][0][0] = std::cos(2 * x);
        hs[2][i][1][2] = hs[2][i][2][1] = 0.3 * std::sin(x);
    }
    // dW+ - dW- = (1/2) <C, h>, with dW+ chosen freely
    const int n = 3;
    std::vector<double> a{1.3, -0.4, 0.7}, b(n), cot(n);
    for (int k = 0; k < n; ++k) {
        cot[k] = pair_integrate(bg.cotton, hs[k], bg);
        b[k] = a[k] - 0.5 * cot[k];
    }
    auto d = pm_decomposition(a, b, hs, bg);
    ASSERT_EQ(d.status, "regular");
    EXPECT_LT(d.resum_residual, 1e-12);
    EXPECT_LT(d.split_identity_residual, 1e-6);
    EXPECT_LT(d.kernel_residual, 1e-9);

    // brute force: h+ direction p with b.p = 0, n^T G p = 0 (n = a x b), a.p = 1
    Eigen::Matrix3d G;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) G(i, j) = pair_integrate(hs[i], hs[j], bg);
    Eigen::Vector3d av(a.data()), bv(b.data()), nv = av.cross(bv);
    Eigen::Matrix3d M;
    M.row(0) = bv.transpose();
    M.row(1) = (G * nv).transpose();
    M.row(2) = av.transpose();
    Eigen::Vector3d p = M.fullPivLu().solve(Eigen::Vector3d(0, 0, 1));
    M.row(0) = av.transpose();
    M.row(2) = bv.transpose();
    Eigen::Vector3d q = M.fullPivLu().solve(Eigen::Vector3d(0, 0, 1));
    for (int k = 0; k < n; ++k) {
        EXPECT_LT((d.plus[k] - a[k] * p).norm(), 1e-9) << k;
        EXPECT_LT((d.minus[k] - b[k] * q).norm(), 1e-9) << k;
    }

    // reversing orientation exchanges the roles
    auto r = pm_decomposition(b, a, hs, bg);
    for (int k = 0; k < n; ++k) {
        EXPECT_LT((r.plus[k] - d.minus[k]).norm(), 1e-9);
        EXPECT_LT((r.minus[k] - d.plus[k]).norm(), 1e-9);
    }
}

TEST(Variation, SelfDualSplitDegenerateCases) {
    auto grid = make_grid(Topology::S3, {8, 8, 8});
    auto bg = with_cotton(intrinsic_curvature(round_s3(), grid));
    std::vector<TensorField> hs{bg.gamma, berger_derivative(1.0, grid), scaled(berger_derivative(1.0, grid), 0)};
    for (std::size_t i = 0; i < grid.size(); ++i) hs[2][i][0][0] = std::cos(grid.nodes[i][0]);
    auto t = pm_decomposition({0, 0, 0}, {0, 0, 0}, hs, bg);
    EXPECT_EQ(t.status, "trivial");
    EXPECT_TRUE(t.applicable);
    auto e = pm_decomposition({1, 2, 3}, {1, 2, 3}, hs, bg);
    EXPECT_EQ(e.status, "dEta_zero");
    EXPECT_FALSE(e.applicable);
    EXPECT_LT(e.resum_residual, 1e-12);

    EXPECT_THROW(pm_decomposition({1, 2}, {1, 2}, {hs[0], hs[1]}, bg), Error);
    EXPECT_THROW(pm_decomposition({1, 2, 3}, {1, 2, 3}, {hs[0], hs[1], scaled(hs[0], 2)}, bg), Error);
    EXPECT_THROW(pm_decomposition({1, 2, 3}, {1, 2, 3}, hs, intrinsic_curvature(round_s3(), grid)), Error);
}
