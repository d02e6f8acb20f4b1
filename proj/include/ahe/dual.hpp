#pragma once
// Forward-mode dual numbers. Nest Dual<Dual<double,N>,N> for second derivatives.

#include <array>
#include <cmath>
#include <type_traits>

namespace ahe {

template <class T, int N>
struct Dual {
    T v{};
    std::array<T, N> d{};

    Dual() = default;
    Dual(double x) : v(x) {}  // NOLINT implicit on purpose: literals mix freely
    template <class S>
        requires(!std::is_arithmetic_v<T> && std::is_same_v<S, T>)
    Dual(const S& x) : v(x) {}

    static Dual variable(const T& x, int i) {
        Dual r;
        r.v = x;
        r.d[i] = T(1.0);
        return r;
    }

    Dual& operator+=(const Dual& o) {
        v += o.v;
        for (int i = 0; i < N; ++i) d[i] += o.d[i];
        return *this;
    }
    Dual& operator-=(const Dual& o) {
        v -= o.v;
        for (int i = 0; i < N; ++i) d[i] -= o.d[i];
        return *this;
    }
    Dual& operator*=(const Dual& o) {
        for (int i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
        v *= o.v;
        return *this;
    }
    Dual& operator/=(const Dual& o) {
        T inv = T(1.0) / o.v;
        for (int i = 0; i < N; ++i) d[i] = (d[i] - v * inv * o.d[i]) * inv;
        v *= inv;
        return *this;
    }
};

template <class X>
struct is_dual : std::false_type {};
template <class T, int N>
struct is_dual<Dual<T, N>> : std::true_type {};
template <class X>
inline constexpr bool is_dual_v = is_dual<X>::value;

inline double value(double x) { return x; }
template <class T, int N>
double value(const Dual<T, N>& x) {
    return value(x.v);
}

// chain rule: f(x) with f'(x.v) = df
template <class T, int N>
Dual<T, N> chain(const Dual<T, N>& x, const T& f, const T& df) {
    Dual<T, N> r;
    r.v = f;
    for (int i = 0; i < N; ++i) r.d[i] = df * x.d[i];
    return r;
}

template <class T, int N>
Dual<T, N> operator-(const Dual<T, N>& a) {
    Dual<T, N> r;
    r.v = -a.v;
    for (int i = 0; i < N; ++i) r.d[i] = -a.d[i];
    return r;
}
template <class T, int N>
Dual<T, N> operator+(const Dual<T, N>& a) {
    return a;
}

#define AHE_DUAL_BINOP(op, cop)                                                   \
    template <class T, int N>                                                     \
    Dual<T, N> operator op(Dual<T, N> a, const Dual<T, N>& b) {                   \
        return a cop b;                                                           \
    }                                                                             \
    template <class T, int N, class S>                                            \
        requires(std::is_arithmetic_v<S> || (std::is_same_v<S, T> && !std::is_arithmetic_v<T>)) \
    Dual<T, N> operator op(Dual<T, N> a, const S& b) {                            \
        return a cop Dual<T, N>(b);                                               \
    }                                                                             \
    template <class T, int N, class S>                                            \
        requires(std::is_arithmetic_v<S> || (std::is_same_v<S, T> && !std::is_arithmetic_v<T>)) \
    Dual<T, N> operator op(const S& a, const Dual<T, N>& b) {                     \
        return Dual<T, N>(a) cop b;                                               \
    }

AHE_DUAL_BINOP(+, +=)
AHE_DUAL_BINOP(-, -=)
AHE_DUAL_BINOP(*, *=)
AHE_DUAL_BINOP(/, /=)
#undef AHE_DUAL_BINOP

template <class T, int N>
bool operator<(const Dual<T, N>& a, const Dual<T, N>& b) {
    return value(a) < value(b);
}
template <class T, int N>
bool operator>(const Dual<T, N>& a, const Dual<T, N>& b) {
    return value(a) > value(b);
}

template <class T, int N>
Dual<T, N> exp(const Dual<T, N>& x) {
    using std::exp;
    T e = exp(x.v);
    return chain(x, e, e);
}
template <class T, int N>
Dual<T, N> log(const Dual<T, N>& x) {
    using std::log;
    return chain(x, log(x.v), T(1.0) / x.v);
}
template <class T, int N>
Dual<T, N> sqrt(const Dual<T, N>& x) {
    using std::sqrt;
    T s = sqrt(x.v);
    return chain(x, s, T(0.5) / s);
}
template <class T, int N>
Dual<T, N> sin(const Dual<T, N>& x) {
    using std::cos;
    using std::sin;
    return chain(x, sin(x.v), cos(x.v));
}
template <class T, int N>
Dual<T, N> cos(const Dual<T, N>& x) {
    using std::cos;
    using std::sin;
    return chain(x, cos(x.v), -sin(x.v));
}
template <class T, int N>
Dual<T, N> sinh(const Dual<T, N>& x) {
    using std::cosh;
    using std::sinh;
    return chain(x, sinh(x.v), cosh(x.v));
}
template <class T, int N>
Dual<T, N> cosh(const Dual<T, N>& x) {
    using std::cosh;
    using std::sinh;
    return chain(x, cosh(x.v), sinh(x.v));
}
template <class T, int N>
Dual<T, N> pow(const Dual<T, N>& x, double p) {
    using std::pow;
    return chain(x, pow(x.v, p), T(p) * pow(x.v, p - 1.0));
}
template <class T, int N>
Dual<T, N> pow(const Dual<T, N>& x, const Dual<T, N>& p) {
    return exp(p * log(x));
}

// integer power by repeated squaring, exact for small exponents
template <class T>
T ipow(const T& x, int n) {
    if (n < 0) return T(1.0) / ipow(x, -n);
    T r(1.0), b = x;
    while (n) {
        if (n & 1) r = r * b;
        n >>= 1;
        if (n) b = b * b;
    }
    return r;
}

// seed helpers: variables for nested jets up to order 4
template <int N>
using D1 = Dual<double, N>;
template <int N>
using D2 = Dual<D1<N>, N>;
template <int N>
using D3 = Dual<D2<N>, N>;
template <int N>
using D4 = Dual<D3<N>, N>;

// lift a point of type T into independent variables of Dual<T,N>
template <class T, int N>
std::array<Dual<T, N>, N> seed(const std::array<T, N>& x) {
    std::array<Dual<T, N>, N> r;
    for (int i = 0; i < N; ++i) r[i] = Dual<T, N>::variable(x[i], i);
    return r;
}

// lift a point of type T into a second-order jet Dual<Dual<T,N>,N>
template <class T, int N>
std::array<Dual<Dual<T, N>, N>, N> seed2(const std::array<T, N>& x) {
    using In = Dual<T, N>;
    using Out = Dual<In, N>;
    std::array<Out, N> r;
    for (int i = 0; i < N; ++i) {
        Out o;
        o.v = In::variable(x[i], i);
        o.d[i] = In(T(1.0));
        r[i] = o;
    }
    return r;
}

}  // namespace ahe
