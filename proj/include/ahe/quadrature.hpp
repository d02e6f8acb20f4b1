#pragma once
// 1D rules and small fitting helpers shared by the numeric layers.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

namespace ahe {

template <class Real>
struct BasicRule {
    std::vector<Real> x;
    std::vector<Real> w;
};
using Rule = BasicRule<double>;

// Gauss-Legendre on [a,b] via Newton on P_n with the Tricomi initial guess.
template <class Real = double>
BasicRule<Real> gauss_legendre(int n, Real a = -1, Real b = 1) {
    BasicRule<Real> r;
    r.x.resize(n);
    r.w.resize(n);
    const Real half = (b - a) / 2, mid = (a + b) / 2;
    const Real eps = 4 * std::numeric_limits<Real>::epsilon();
    auto legendre = [n](Real z, Real& dp) {
        Real p0 = 1, p1 = z;
        for (int k = 2; k <= n; ++k) {
            Real p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1);
        return p1;
    };
    for (int i = 0; i < (n + 1) / 2; ++i) {
        Real z = std::cos(std::numbers::pi_v<Real> * (i + Real(0.75)) / (n + Real(0.5)));
        Real dp = 0;
        for (int it = 0; it < 100; ++it) {
            Real dz = legendre(z, dp) / dp;
            z -= dz;
            if (std::abs(dz) < eps) break;
        }
        legendre(z, dp);
        Real w = 2 / ((1 - z * z) * dp * dp);
        r.x[i] = mid - half * z;
        r.x[n - 1 - i] = mid + half * z;
        r.w[i] = r.w[n - 1 - i] = w * half;
    }
    return r;
}

// composite Gauss-Legendre over the given breakpoints
template <class Real = double>
BasicRule<Real> composite_gl(const std::vector<Real>& breaks, int n) {
    BasicRule<Real> out;
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        auto r = gauss_legendre<Real>(n, breaks[p], breaks[p + 1]);
        out.x.insert(out.x.end(), r.x.begin(), r.x.end());
        out.w.insert(out.w.end(), r.w.begin(), r.w.end());
    }
    return out;
}

inline std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
    return v;
}

inline std::vector<double> geomspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a * std::pow(b / a, double(i) / (n - 1));
    return v;
}

// Chebyshev points of the first kind mapped to [a,b], increasing
inline std::vector<double> chebyshev_nodes(int n, double a, double b) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) {
        double c = -std::cos(std::numbers::pi * (i + 0.5) / n);
        v[i] = 0.5 * (a + b) + 0.5 * (b - a) * c;
    }
    return v;
}

// Neville evaluation at x0 of the interpolant through (x, y)
inline double neville(const std::vector<double>& x, std::vector<double> y, double x0 = 0.0) {
    const std::size_t n = x.size();
    for (std::size_t m = 1; m < n; ++m)
        for (std::size_t i = 0; i + m < n; ++i)
            y[i] = ((x0 - x[i + m]) * y[i] + (x[i] - x0) * y[i + 1]) / (x[i] - x[i + m]);
    return y[0];
}

// Linear least-squares with unit-scaled columns. Returns coefficients and max misfit.
inline std::pair<Eigen::VectorXd, double> least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
    Eigen::VectorXd scale = A.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < scale.size(); ++j)
        if (scale(j) == 0.0) scale(j) = 1.0;
    Eigen::MatrixXd As = A * scale.cwiseInverse().asDiagonal();
    Eigen::VectorXd c = As.colPivHouseholderQr().solve(b);
    c = c.cwiseQuotient(scale);
    double misfit = (A * c - b).cwiseAbs().maxCoeff();
    return {c, misfit};
}

}  // namespace ahe
