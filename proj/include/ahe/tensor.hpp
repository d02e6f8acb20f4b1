#pragma once
// Fixed-size tensors over an arbitrary scalar (double or nested Dual).

#include <array>
#include <cmath>

#include "ahe/dual.hpp"

namespace ahe {

template <class T, std::size_t N>
using Vec = std::array<T, N>;
template <class T, std::size_t N>
using Mat = std::array<std::array<T, N>, N>;

using Vec3 = Vec<double, 3>;
using Vec4 = Vec<double, 4>;
using Mat3 = Mat<double, 3>;
using Mat4 = Mat<double, 4>;

// (4,0) curvature-type tensor stored densely, index order abcd
template <class T, std::size_t N>
struct Rank4 {
    std::array<T, N * N * N * N> a{};
    T& operator()(int i, int j, int k, int l) { return a[((i * N + j) * N + k) * N + l]; }
    const T& operator()(int i, int j, int k, int l) const { return a[((i * N + j) * N + k) * N + l]; }
};

template <class T, std::size_t N>
Mat<T, N> zero_mat() {
    Mat<T, N> m;
    for (auto& row : m) row.fill(T(0.0));
    return m;
}

template <class T, std::size_t N>
Mat<T, N> identity_mat() {
    Mat<T, N> m = zero_mat<T, N>();
    for (int i = 0; i < N; ++i) m[i][i] = T(1.0);
    return m;
}

template <class T, std::size_t N>
Mat<double, N> values(const Mat<T, N>& m) {
    Mat<double, N> r;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) r[i][j] = value(m[i][j]);
    return r;
}

// Gauss-Jordan without pivoting; inputs are SPD so the diagonal stays positive.
template <class T, std::size_t N>
Mat<T, N> inverse(const Mat<T, N>& m) {
    Mat<T, N> a = m;
    Mat<T, N> inv = identity_mat<T, N>();
    for (int c = 0; c < N; ++c) {
        T p = T(1.0) / a[c][c];
        for (int j = 0; j < N; ++j) {
            a[c][j] = a[c][j] * p;
            inv[c][j] = inv[c][j] * p;
        }
        for (int r = 0; r < N; ++r) {
            if (r == c) continue;
            T f = a[r][c];
            if (value(f) == 0.0 && !is_dual_v<T>) continue;
            for (int j = 0; j < N; ++j) {
                a[r][j] = a[r][j] - f * a[c][j];
                inv[r][j] = inv[r][j] - f * inv[c][j];
            }
        }
    }
    return inv;
}

template <class T, std::size_t N>
T determinant(const Mat<T, N>& m) {
    Mat<T, N> a = m;
    T det(1.0);
    for (int c = 0; c < N; ++c) {
        det = det * a[c][c];
        T p = T(1.0) / a[c][c];
        for (int r = c + 1; r < N; ++r) {
            T f = a[r][c] * p;
            for (int j = c; j < N; ++j) a[r][j] = a[r][j] - f * a[c][j];
        }
    }
    return det;
}

// <a,b>_g = g^{ik} g^{jl} a_ij b_kl
template <class T, std::size_t N>
T inner(const Mat<T, N>& a, const Mat<T, N>& b, const Mat<T, N>& ginv) {
    T s(0.0);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            T ai(0.0);
            for (int k = 0; k < N; ++k)
                for (int l = 0; l < N; ++l) ai = ai + ginv[i][k] * ginv[j][l] * b[k][l];
            s = s + a[i][j] * ai;
        }
    return s;
}

template <class T, std::size_t N>
T trace(const Mat<T, N>& a, const Mat<T, N>& ginv) {
    T s(0.0);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) s = s + ginv[i][j] * a[i][j];
    return s;
}

template <std::size_t N>
double max_abs(const Mat<double, N>& a) {
    double m = 0;
    for (auto& row : a)
        for (double x : row) m = std::max(m, std::abs(x));
    return m;
}

template <std::size_t N>
double max_abs(const Rank4<double, N>& t) {
    double m = 0;
    for (double x : t.a) m = std::max(m, std::abs(x));
    return m;
}

template <std::size_t N>
double asymmetry(const Mat<double, N>& a) {
    double m = 0;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) m = std::max(m, std::abs(a[i][j] - a[j][i]));
    return m;
}

// sign of the permutation (i,j,k,l) of (0,1,2,3), 0 if any index repeats
inline int levi4(int i, int j, int k, int l) {
    int p[4] = {i, j, k, l};
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
            if (p[a] == p[b]) return 0;
    int s = 1;
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
            if (p[a] > p[b]) s = -s;
    return s;
}

inline int levi3(int i, int j, int k) {
    if (i == j || j == k || i == k) return 0;
    int s = 1;
    if (i > j) s = -s;
    if (i > k) s = -s;
    if (j > k) s = -s;
    return s;
}

}  // namespace ahe
