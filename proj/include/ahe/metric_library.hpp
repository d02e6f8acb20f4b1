#pragma once
// Cohomogeneity-one Einstein families and their geodesic compactification.
//
// A RadialChartMetric is g = U(r) dr^2 + sum_i A_i(r) h_i(x), where each h_i is
// a unit model block on the boundary chart. The normal form rewrites it as
// gbar = drho^2 + rho^2 sum_i A_i(r(rho)) h_i(x) with rho = c exp(-dist(r)).

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "ahe/boundary_geometry.hpp"
#include "ahe/expression.hpp"
#include "ahe/quadrature.hpp"

namespace ahe {

enum class BlockKind { S3, S2, Circle, T3 };

inline BlockKind block_kind_from_symbol(const std::string& s) {
    if (s == "S3") return BlockKind::S3;
    if (s == "S2") return BlockKind::S2;
    if (s == "theta") return BlockKind::Circle;
    if (s == "T3") return BlockKind::T3;
    throw Error("metric_library", "unknown block symbol '" + s + "'");
}

inline std::string block_symbol(BlockKind k) {
    switch (k) {
        case BlockKind::S3: return "S3";
        case BlockKind::S2: return "S2";
        case BlockKind::Circle: return "theta";
        case BlockKind::T3: return "T3";
    }
    return "?";
}

// Unit model metric of a block in the boundary chart of its topology.
template <class T>
Mat<T, 3> unit_block(BlockKind k, const Vec<T, 3>& x) {
    using std::cos;
    using std::sin;
    Mat<T, 3> g = zero_mat<T, 3>();
    switch (k) {
        case BlockKind::S3: {
            T c = cos(x[0]), s = sin(x[0]);
            g[0][0] = T(1.0);
            g[1][1] = c * c;
            g[2][2] = s * s;
            break;
        }
        case BlockKind::S2: {
            T s = sin(x[0]);
            g[0][0] = T(1.0);
            g[1][1] = s * s;
            break;
        }
        case BlockKind::Circle: g[2][2] = T(1.0); break;
        case BlockKind::T3: g = identity_mat<T, 3>(); break;
    }
    return g;
}

struct Block {
    BlockKind kind;
    Expression profile;  // bound, variable r
};

struct RadialChartMetric {
    std::string family;
    Params params;
    Topology topology = Topology::S3;
    Expression u;  // coefficient of dr^2
    std::vector<Block> blocks;
    double r_min = 0;
    std::optional<double> circle_length;
    int chi = 0;
    int tau = 0;
    double eta = 0;

    template <class T>
    T U(const T& r) const {
        return u.eval(r);
    }
    template <class T>
    T A(std::size_t i, const T& r) const {
        return blocks[i].profile.eval(r);
    }

    // physical metric in the chart (r, x)
    template <class T>
    Mat<T, 4> metric(const Vec<T, 4>& X) const {
        Mat<T, 4> g = zero_mat<T, 4>();
        g[0][0] = U(X[0]);
        Vec<T, 3> x{X[1], X[2], X[3]};
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            T a = A(i, X[0]);
            Mat<T, 3> h = unit_block(blocks[i].kind, x);
            for (int p = 0; p < 3; ++p)
                for (int q = 0; q < 3; ++q) g[p + 1][q + 1] = g[p + 1][q + 1] + a * h[p][q];
        }
        return g;
    }
};

namespace detail {

inline void check_blocks(Topology t, const std::vector<Block>& blocks) {
    std::vector<BlockKind> want;
    switch (t) {
        case Topology::S3: want = {BlockKind::S3}; break;
        case Topology::S2xS1: want = {BlockKind::S2, BlockKind::Circle}; break;
        case Topology::T3: want = {BlockKind::T3}; break;
    }
    if (blocks.size() != want.size()) throw Error("metric_library", "block list does not match topology " + to_string(t));
    for (std::size_t i = 0; i < want.size(); ++i)
        if (blocks[i].kind != want[i])
            throw Error("metric_library", "block " + std::to_string(i) + " must be '" + block_symbol(want[i]) + "'");
}

// positivity and finiteness of all profiles on a sweep of (r_min, r_min + 30]
inline void check_positive(const RadialChartMetric& m) {
    for (double e : geomspace(1e-6, 30.0, 120)) {
        double r = m.r_min + e;
        double u = m.U(r);
        if (!(u > 0) || !std::isfinite(u))
            throw Error("metric_library", "profile u is not positive at r = " + std::to_string(r));
        for (std::size_t i = 0; i < m.blocks.size(); ++i) {
            double a = m.A(i, r);
            if (!(a > 0) || !std::isfinite(a))
                throw Error("metric_library", "block profile " + std::to_string(i) + " is not positive at r = " + std::to_string(r));
        }
    }
}

inline double require_param(const Params& p, const std::string& k, const std::string& family) {
    auto it = p.find(k);
    if (it == p.end()) throw Error("metric_library", family + " requires parameter '" + k + "'");
    return it->second;
}

}  // namespace detail

// Largest root of r^3 + r - 2m by safeguarded Newton from (2m)^(1/3) + 1.
inline double ads_horizon_radius(double m) {
    if (!(m > 0)) throw Error("metric_library", "ads_schwarzschild requires m > 0");
    double lo = 0, hi = std::cbrt(2 * m) + 1, r = hi;
    for (int it = 0; it < 200; ++it) {
        double p = r * r * r + r - 2 * m;
        if (p > 0) hi = r;
        else lo = r;
        double step = p / (3 * r * r + 1);
        double next = r - step;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - r) <= 4 * std::numeric_limits<double>::epsilon() * r) return next;
        r = next;
    }
    return r;
}

// Circle period that makes the bolt at r+ smooth.
inline double ads_circle_length(double m) {
    double rp = ads_horizon_radius(m);
    return 4 * std::numbers::pi * rp / (1 + 3 * rp * rp);
}

struct CustomSpec {
    std::string u;
    std::vector<std::pair<std::string, std::string>> blocks;  // (symbol, profile)
    double r_min = 0;
    std::optional<Topology> topology;  // inferred from the blocks when absent
};

struct FamilyInfo {
    std::string name;
    std::string params;
    std::string description;
};

inline std::vector<FamilyInfo> families() {
    return {
        {"hyperbolic", "", "hyperbolic 4-space dr^2 + sinh^2(r) g_S3, chi = 1"},
        {"hyperbolic_quotient", "L > 0", "dr^2 + sinh^2(r) g_S2 + cosh^2(r) dtheta^2, theta period L, chi = 0"},
        {"ads_schwarzschild", "m > 0",
         "(1+r^2-2m/r)^-1 dr^2 + r^2 g_S2 + (1+r^2-2m/r) dtheta^2 on r >= r+, period 4 pi r+/(1+3 r+^2), chi = 2"},
        {"custom", "u, blocks, r_min, any named parameters", "user warped product; chi, tau from topology_invariants"},
    };
}

inline RadialChartMetric make_family(const std::string& name, const Params& params,
                                     const std::optional<CustomSpec>& custom = std::nullopt) {
    RadialChartMetric m;
    m.family = name;
    m.params = params;
    auto bind = [&](const std::string& s) { return Expression::parse(s).bind(params); };
    if (name == "hyperbolic") {
        m.topology = Topology::S3;
        m.u = bind("1");
        m.blocks = {{BlockKind::S3, bind("sinh(r)^2")}};
        m.r_min = 0;
        m.chi = 1;
    } else if (name == "hyperbolic_quotient") {
        double L = detail::require_param(params, "L", name);
        if (!(L > 0)) throw Error("metric_library", "hyperbolic_quotient requires L > 0");
        m.topology = Topology::S2xS1;
        m.u = bind("1");
        m.blocks = {{BlockKind::S2, bind("sinh(r)^2")}, {BlockKind::Circle, bind("cosh(r)^2")}};
        m.r_min = 0;
        m.circle_length = L;
        m.chi = 0;
    } else if (name == "ads_schwarzschild") {
        double mass = detail::require_param(params, "m", name);
        if (!(mass > 0)) throw Error("metric_library", "ads_schwarzschild requires m > 0");
        m.topology = Topology::S2xS1;
        m.u = bind("(1+r^2-2*m/r)^(-1)");
        m.blocks = {{BlockKind::S2, bind("r^2")}, {BlockKind::Circle, bind("1+r^2-2*m/r")}};
        m.r_min = ads_horizon_radius(mass);
        m.circle_length = ads_circle_length(mass);
        m.chi = 2;
    } else if (name == "custom") {
        if (!custom) throw Error("metric_library", "custom family requires a profile specification");
        m.u = bind(custom->u);
        for (const auto& [sym, prof] : custom->blocks) m.blocks.push_back({block_kind_from_symbol(sym), bind(prof)});
        if (m.blocks.empty()) throw Error("metric_library", "custom family needs at least one block");
        if (custom->topology) m.topology = *custom->topology;
        else if (m.blocks[0].kind == BlockKind::S3) m.topology = Topology::S3;
        else if (m.blocks[0].kind == BlockKind::T3) m.topology = Topology::T3;
        else m.topology = Topology::S2xS1;
        m.r_min = custom->r_min;
        if (m.topology != Topology::S3) {
            auto it = params.find("L");
            if (it == params.end()) throw Error("metric_library", "custom family on " + to_string(m.topology) + " requires parameter 'L'");
            if (!(it->second > 0)) throw Error("metric_library", "L must be positive");
            m.circle_length = it->second;
        }
    } else {
        throw Error("metric_library", "unknown family '" + name + "'");
    }
    detail::check_blocks(m.topology, m.blocks);
    detail::check_positive(m);
    return m;
}

struct NormalFormOptions {
    double rho_max = 0.3;
    double panel_width = 0.05;    // in u = sqrt(r - r_min)
    double anchor_distance = 8;   // table extends until the distance from r_min reaches this
    double gradient_tol = 1e-8;   // allowed | |grad rho|^2 - 1 | at rho_max
};

class NormalFormMetric {
public:
    // table, tail and inversion run in extended precision
    using Real = long double;

    NormalFormMetric(RadialChartMetric chart, NormalFormOptions opt = {}) : m_(std::move(chart)), opt_(opt) {
        build_table();
        build_tail();
        check();
    }

    const RadialChartMetric& chart() const { return m_; }
    const NormalFormOptions& options() const { return opt_; }
    double rho_max() const { return opt_.rho_max; }
    double log_c() const { return double(log_c_); }
    double anchor() const { return double(r_anchor_); }
    // rho at the inner boundary of the chart: the compactified chart is (0, rho_inner)
    double rho_inner() const { return double(std::exp(log_c_)); }
    // limits of rho^2 A_i(r); the first block is normalised to 1
    const std::vector<double>& boundary_coefficients() const { return coef_; }

    std::string normalization() const {
        switch (m_.topology) {
            case Topology::S3: return "unit round S3 (g0 sphere coefficient = 1)";
            case Topology::S2xS1: return "unit S2 factor (g0 sphere coefficient = 1)";
            case Topology::T3: return "unit flat T3 factor (g0 coefficient = 1)";
        }
        return "";
    }

    // geodesic distance from r_min
    double distance(double r) const { return double(distance_x(r)); }
    double log_rho(double r) const { return double(log_rho_x(r)); }

    template <class T>
    T rho(const T& r) const {
        if constexpr (std::is_same_v<T, double>) {
            return double(std::exp(log_rho_x(r)));
        } else {
            using S = std::decay_t<decltype(r.v)>;
            using std::sqrt;
            S p = rho<S>(r.v);
            S dp = -p * sqrt(m_.U(r.v));
            T out;
            out.v = p;
            for (std::size_t i = 0; i < out.d.size(); ++i) out.d[i] = dp * r.d[i];
            return out;
        }
    }

    template <class T>
    T r_of_rho(const T& rho) const {
        if constexpr (std::is_same_v<T, double>) {
            return double(invert(rho));
        } else {
            using S = std::decay_t<decltype(rho.v)>;
            using std::sqrt;
            S r = r_of_rho<S>(rho.v);
            S dr = S(-1.0) / (rho.v * sqrt(m_.U(r)));
            T out;
            out.v = r;
            for (std::size_t i = 0; i < out.d.size(); ++i) out.d[i] = dr * rho.d[i];
            return out;
        }
    }

    // r(rho) in extended precision; the double overload rounds this value
    Real r_of_rho_x(Real rho) const { return invert(rho); }
    // chart radius at geodesic distance d from the inner boundary
    Real r_at_distance(Real d) const { return invert(std::exp(log_c_ - d)); }
    Real log_c_x() const { return log_c_; }

    // rho^2 A_i(r(rho)) - (limit at rho = 0), per block, formed in extended precision
    std::vector<double> profile_deviation(double rho) const {
        Real r = invert(rho), rr = Real(rho) * Real(rho);
        std::vector<double> out(m_.blocks.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = double(rr * m_.A(i, r) - coef_x_[i]);
        return out;
    }

    // gbar_rho(x) = rho^2 sum_i A_i(r(rho)) h_i(x)
    template <class T>
    Mat<T, 3> gbar_rho(const T& rho, const Vec<T, 3>& x) const {
        return slice(rho, r_of_rho(rho), x);
    }

    // gbar_rho with r = r(rho) already known
    template <class T, class R>
    Mat<T, 3> slice(const R& rho, const R& r, const Vec<T, 3>& x) const {
        R rr = rho * rho;
        Mat<T, 3> g = zero_mat<T, 3>();
        for (std::size_t i = 0; i < m_.blocks.size(); ++i) {
            T a = rr * m_.A(i, r);
            Mat<T, 3> h = unit_block(m_.blocks[i].kind, x);
            for (int p = 0; p < 3; ++p)
                for (int q = 0; q < 3; ++q) g[p][q] = g[p][q] + a * h[p][q];
        }
        return g;
    }

    // compactified metric in the chart (rho, x)
    template <class T>
    Mat<T, 4> gbar(const Vec<T, 4>& X) const {
        Mat<T, 4> g = zero_mat<T, 4>();
        g[0][0] = T(1.0);
        Mat<T, 3> s = gbar_rho(X[0], Vec<T, 3>{X[1], X[2], X[3]});
        for (int p = 0; p < 3; ++p)
            for (int q = 0; q < 3; ++q) g[p + 1][q + 1] = s[p][q];
        return g;
    }

    template <class T>
    Mat<T, 3> boundary_metric(const Vec<T, 3>& x) const {
        Mat<T, 3> g = zero_mat<T, 3>();
        for (std::size_t i = 0; i < m_.blocks.size(); ++i) {
            Mat<T, 3> h = unit_block(m_.blocks[i].kind, x);
            for (int p = 0; p < 3; ++p)
                for (int q = 0; q < 3; ++q) g[p][q] = g[p][q] + T(coef_[i]) * h[p][q];
        }
        return g;
    }

    // |grad rho|^2_gbar - 1 with d(log rho)/dr taken by differencing the table
    double gradient_residual(double rho) const {
        Real r = invert(rho);
        Real h = Real(1e-3) * std::max(Real(1), std::min(r - m_.r_min, std::abs(r)));
        if (r - 2 * h <= m_.r_min) h = (r - m_.r_min) / 4;
        Real d = (log_rho_x(r - 2 * h) - 8 * log_rho_x(r - h) + 8 * log_rho_x(r + h) - log_rho_x(r + 2 * h)) / (12 * h);
        return double(d * d / m_.U(r) - 1);
    }

    Real distance_x(Real r) const {
        if (r < m_.r_min) throw DomainError("metric_library", "radius below the inner boundary of the chart");
        if (r <= r_anchor_) return table_distance(std::sqrt(r - m_.r_min));
        return dist_anchor_ + tail_integral(r_anchor_, r, [this](Real s) { return std::sqrt(m_.U(s)); });
    }

    Real log_rho_x(Real r) const {
        if (r < m_.r_min) throw DomainError("metric_library", "radius below the inner boundary of the chart");
        if (r <= r_anchor_) return log_c_ - table_distance(std::sqrt(r - m_.r_min));
        return -std::log(m_.A(0, r)) / 2 + tail(r);
    }

private:
    template <class F>
    Real tail_integral(Real a, Real b, F f) const {
        auto q = gauss_legendre<Real>(24, a, b);
        Real s = 0;
        for (std::size_t i = 0; i < q.x.size(); ++i) s += q.w[i] * f(q.x[i]);
        return s;
    }

    // integral of f over [r, infinity) through s = r + w (1 - t) / t
    template <class F>
    Real improper(Real r, F f) const {
        static const auto q = composite_gl<Real>({0, 0.05L, 0.2L, 0.5L, 1}, 20);
        const Real w = std::max(Real(1), std::abs(r));
        Real s = 0;
        for (std::size_t i = 0; i < q.x.size(); ++i) {
            Real t = q.x[i];
            Real x = r + w * (1 - t) / t;
            Real v = f(x);
            if (!std::isfinite(v)) {
                // profiles growing like exp(k r) overflow far out, where the integrand is below rounding
                if (x > r + 30) continue;
                throw Error("metric_library", "asymptotic matching failure: tail integrand not finite");
            }
            s += q.w[i] * v * w / (t * t);
        }
        return s;
    }

    Real dlog_block(std::size_t i, Real r) const {
        auto a = m_.A(i, Dual<Real, 1>::variable(r, 0));
        return a.d[0] / a.v;
    }

    // int_r^inf sqrt(U) - (1/2)(log A_0)'
    Real tail(Real r) const {
        return improper(r, [this](Real s) { return std::sqrt(m_.U(s)) - dlog_block(0, s) / 2; });
    }

    Real integrand_u(Real u) const { return 2 * u * std::sqrt(m_.U(m_.r_min + u * u)); }

    Real panel_integral(Real u0, Real u1) const {
        static const auto q = gauss_legendre<Real>(12);
        Real s = 0, h = (u1 - u0) / 2, c = (u0 + u1) / 2;
        for (std::size_t i = 0; i < q.x.size(); ++i) s += q.w[i] * integrand_u(c + h * q.x[i]);
        return s * h;
    }

    Real table_distance(Real u) const {
        std::size_t k = std::min<std::size_t>(std::size_t(u / du_), cum_.size() - 2);
        return cum_[k] + panel_integral(k * du_, u);
    }

    void build_table() {
        du_ = opt_.panel_width;
        cum_.assign(1, 0);
        const Real u_cap = 2000;
        for (std::size_t k = 0;; ++k) {
            Real u0 = k * du_, u1 = (k + 1) * du_;
            Real v = panel_integral(u0, u1);
            if (!std::isfinite(v) || v <= 0)
                throw Error("metric_library", "non-monotone rho: u profile not positive near r = " +
                                                  std::to_string(double(m_.r_min + u1 * u1)));
            cum_.push_back(cum_.back() + v);
            if ((cum_.back() >= opt_.anchor_distance && u1 * u1 >= 1) || u1 >= u_cap) break;
        }
        Real u_a = (cum_.size() - 1) * du_;
        r_anchor_ = m_.r_min + u_a * u_a;
        dist_anchor_ = cum_.back();
    }

    void build_tail() {
        Real t = tail(r_anchor_);
        log_c_ = dist_anchor_ - std::log(m_.A(0, r_anchor_)) / 2 + t;
        if (!std::isfinite(log_c_)) throw Error("metric_library", "asymptotic matching failure: normalisation constant");
        coef_x_.assign(m_.blocks.size(), 1);
        for (std::size_t i = 1; i < m_.blocks.size(); ++i) {
            Real lim = std::log(m_.A(i, r_anchor_) / m_.A(0, r_anchor_)) +
                       improper(r_anchor_, [this, i](Real s) { return dlog_block(i, s) - dlog_block(0, s); });
            coef_x_[i] = std::exp(lim);
            if (!std::isfinite(coef_x_[i]) || coef_x_[i] <= 0)
                throw Error("metric_library", "asymptotic matching failure: block " + std::to_string(i) + " has no finite limit");
        }
        coef_.assign(coef_x_.begin(), coef_x_.end());
    }

    void check() const {
        if (!(opt_.rho_max > 0) || opt_.rho_max >= rho_inner())
            throw Error("metric_library", "rho_max must lie inside (0, rho_inner)");
        double res = gradient_residual(opt_.rho_max);
        if (!(std::abs(res) <= opt_.gradient_tol))
            throw Error("metric_library", "asymptotic matching failure: |grad rho|^2 - 1 = " + std::to_string(res));
    }

    Real invert(Real rho) const {
        if (!(rho > 0)) throw DomainError("metric_library", "rho must be positive");
        struct Last {
            std::uint64_t owner = 0;
            Real rho = 0, r = 0;
        };
        thread_local Last last;
        if (last.owner == id_ && last.rho == rho) return last.r;
        const Real eps = 2 * std::numeric_limits<Real>::epsilon();
        Real y = std::log(rho);
        if (y >= log_c_) throw DomainError("metric_library", "rho beyond the inner boundary of the chart");
        Real r;
        Real target = log_c_ - y;  // required distance
        if (target <= dist_anchor_) {
            auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
            std::size_t k = std::min<std::size_t>(std::size_t(it - cum_.begin()) - 1, cum_.size() - 2);
            Real lo = k * du_, hi = (k + 1) * du_;
            Real u = (lo + hi) / 2;
            for (int iter = 0; iter < 100; ++iter) {
                Real f = table_distance(u) - target;
                if (f > 0) hi = u;
                else lo = u;
                Real next = u - f / integrand_u(u);
                if (!(next > lo && next < hi) || !std::isfinite(next)) next = (lo + hi) / 2;
                if (std::abs(next - u) <= eps * std::max(Real(1), u)) {
                    u = next;
                    break;
                }
                u = next;
            }
            r = m_.r_min + u * u;
        } else {
            Real lo = r_anchor_, w = std::max(Real(1), std::abs(r_anchor_));
            Real hi = r_anchor_ + w;
            while (log_rho_x(hi) > y) {
                lo = hi;
                hi = r_anchor_ + (hi - r_anchor_) * 2;
                if (hi > 1e300) throw DomainError("metric_library", "rho too small to invert");
            }
            r = (lo + hi) / 2;
            for (int iter = 0; iter < 200; ++iter) {
                Real f = log_rho_x(r) - y;
                if (f > 0) lo = r;
                else hi = r;
                Real next = r + f / std::sqrt(m_.U(r));
                if (!(next > lo && next < hi) || !std::isfinite(next)) next = (lo + hi) / 2;
                if (std::abs(next - r) <= eps * std::abs(r)) {
                    r = next;
                    break;
                }
                r = next;
            }
        }
        last = {id_, rho, r};
        return r;
    }

    RadialChartMetric m_;
    NormalFormOptions opt_;
    Real du_ = 0.05L;
    std::vector<Real> cum_;  // distance at u = k du
    Real r_anchor_ = 0, dist_anchor_ = 0, log_c_ = 0;
    std::vector<Real> coef_x_;
    std::vector<double> coef_;
    // keys the inversion cache; addresses get reused, ids do not
    std::uint64_t id_ = next_id();

    static std::uint64_t next_id() {
        static std::atomic<std::uint64_t> n{0};
        return ++n;
    }
};

using NormalForm = std::shared_ptr<const NormalFormMetric>;

inline NormalForm to_normal_form(const RadialChartMetric& m, NormalFormOptions opt = {}) {
    return std::make_shared<const NormalFormMetric>(m, opt);
}

// Fields for the curvature layer. They hold the normal form alive.
inline std::shared_ptr<const MetricField<4>> compactified_field(const NormalForm& nf) {
    return make_field<4>([nf](const auto& X) { return nf->gbar(X); });
}

inline std::shared_ptr<const MetricField<4>> physical_field(const NormalForm& nf) {
    return make_field<4>([nf](const auto& X) { return nf->chart().metric(X); });
}

inline BoundaryField boundary_field(const NormalForm& nf) {
    return make_field<3>([nf](const auto& x) { return nf->boundary_metric(x); });
}

inline BoundaryGrid make_grid_for(const RadialChartMetric& m, std::array<int, 3> resolution) {
    return make_grid(m.topology, resolution, m.circle_length);
}

}  // namespace ahe
