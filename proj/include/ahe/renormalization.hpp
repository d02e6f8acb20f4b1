#pragma once
// Renormalized volume, Weyl energies and the global identities
//   (1/8pi^2) int |W|^2 = chi - (3/4pi^2) V
//   (1/12pi^2) int (|W+|^2 - |W-|^2) = tau - eta
// The physical chart (r, x) is positively oriented; the compactified chart
// (rho, x) then has orientation -1 because rho decreases in r.

#include <Eigen/Eigenvalues>
#include <functional>
#include <map>
#include <numbers>
#include <optional>

#include "ahe/fg_expansion.hpp"
#include "ahe/tensor_core.hpp"

namespace ahe {

inline constexpr int compactified_orientation = -1;

inline int block_dimension(BlockKind k) {
    switch (k) {
        case BlockKind::S3: return 3;
        case BlockKind::S2: return 2;
        case BlockKind::Circle: return 1;
        case BlockKind::T3: return 3;
    }
    return 0;
}

// int over the grid of sqrt(det(sum of unit blocks)): the volume of the unit model boundary
inline long double unit_boundary_volume(const RadialChartMetric& m, const BoundaryGrid& grid) {
    long double s = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        Mat3 h = zero_mat<double, 3>();
        for (const auto& b : m.blocks) {
            Mat3 u = unit_block(b.kind, grid.nodes[i]);
            for (int p = 0; p < 3; ++p)
                for (int q = 0; q < 3; ++q) h[p][q] += u[p][q];
        }
        s += grid.weights[i] * std::sqrt(determinant(h));
    }
    return s;
}

// radial 4-volume density sqrt(U prod A_i^dim_i) per unit boundary volume
template <class Real = double>
Real radial_density(const RadialChartMetric& m, Real r) {
    Real d = m.U(r);
    for (std::size_t i = 0; i < m.blocks.size(); ++i) d *= ipow(m.A(i, r), block_dimension(m.blocks[i].kind));
    return std::sqrt(d);
}

// Composite Gauss-Legendre over [r_min, R]: u = sqrt(r - r_min) on the first unit, then panels of width <= 0.5.
template <class Real, class F>
Real radial_integral(const RadialChartMetric& m, Real R, F f, int nodes = 16) {
    if (R < m.r_min) throw DomainError("renormalization", "radius below the inner boundary");
    const auto q = gauss_legendre<Real>(nodes);
    Real s = 0;
    Real u_end = std::sqrt(std::min<Real>(R - m.r_min, 1));
    for (int p = 0; p < 2; ++p) {
        Real a = u_end * p / 2, b = u_end * (p + 1) / 2, h = (b - a) / 2, c = (a + b) / 2;
        for (std::size_t i = 0; i < q.x.size(); ++i) {
            Real u = c + h * q.x[i];
            s += q.w[i] * h * 2 * u * f(m.r_min + u * u);
        }
    }
    Real a = m.r_min + 1;
    if (R > a) {
        int panels = int(std::ceil(double((R - a) / Real(0.5))));
        Real w = (R - a) / panels;
        for (int p = 0; p < panels; ++p) {
            Real c = a + (p + Real(0.5)) * w, h = w / 2;
            for (std::size_t i = 0; i < q.x.size(); ++i) s += q.w[i] * h * f(c + h * q.x[i]);
        }
    }
    return s;
}

// radial part of vol B(r(rho)), in extended precision
inline long double radial_volume(const NormalForm& nf, long double rho) {
    using Real = long double;
    const auto& m = nf->chart();
    return radial_integral<Real>(m, nf->r_of_rho_x(rho), [&](Real x) { return radial_density<Real>(m, x); });
}

struct VolumeSample {
    double r = 0;
    double rho = 0;
    double volume = 0;
    double subtracted = 0;  // volume - v0/(3 rho^3) - v2/rho
};

// vol B(r) = vol{chart radius <= r}
inline std::vector<VolumeSample> volume_profile(const NormalForm& nf, const BoundaryGrid& grid,
                                                const std::vector<double>& r_values, double v0 = 0, double v2 = 0) {
    const auto& m = nf->chart();
    double ang = unit_boundary_volume(m, grid);
    std::vector<VolumeSample> out;
    for (double r : r_values) {
        VolumeSample s;
        s.r = r;
        s.rho = nf->rho(r);
        s.volume = ang * radial_integral<double>(m, r, [&](double x) { return radial_density(m, x); });
        s.subtracted = s.volume - v0 / (3 * s.rho * s.rho * s.rho) - v2 / s.rho;
        out.push_back(s);
    }
    return out;
}

inline double ball_volume(const NormalForm& nf, double unit_volume, double rho) {
    return double(unit_volume * radial_volume(nf, rho));
}

struct VolumeOptions {
    int counterterm_points = 7;
    double counterterm_lo = 0.02, counterterm_hi = 0.16;
    int fit_points = 24;
    double fit_lo = 0.01, fit_hi = 0.12;
    double max_disagreement = 1e-5;  // |V - V_alt| / max(1, |V|) beyond this is an error
};

struct RenormalizedVolume {
    double v0 = 0, v2 = 0;
    double V = 0;      // counterterm subtraction, extrapolated to rho -> 0
    double V_alt = 0;  // least-squares fit with free divergent coefficients
    double fit_v0_third = 0, fit_v2 = 0;  // leading coefficients of the fit, for comparison with v0/3 and v2
    double fit_misfit = 0;
};

namespace detail {

// vol returns the volume in extended precision so the subtraction keeps its digits
inline double counterterm_estimate(const std::function<long double(double)>& vol, double v0, double v2,
                                   const VolumeOptions& o) {
    std::vector<double> rho = geomspace(o.counterterm_lo, o.counterterm_hi, o.counterterm_points), y;
    for (double p : rho) {
        long double q = p;
        y.push_back(double(vol(p) - v0 / (3 * q * q * q) - v2 / q));
    }
    return neville(rho, y);
}

}  // namespace detail

inline RenormalizedVolume renormalized_volume(const NormalForm& nf, const FGCoefficients& fg, const VolumeOptions& o = {}) {
    RenormalizedVolume rv;
    rv.v0 = fg.v0;
    rv.v2 = fg.v2;
    const long double ang = unit_boundary_volume(nf->chart(), *fg.geometry.grid);
    auto vol = [&](double rho) { return ang * radial_volume(nf, rho); };
    rv.V = detail::counterterm_estimate(vol, rv.v0, rv.v2, o);

    // basis rho^-3, rho^-1, 1, rho, ..., rho^5
    std::vector<double> rho = chebyshev_nodes(o.fit_points, o.fit_lo, o.fit_hi);
    const int pw[] = {-3, -1, 0, 1, 2, 3, 4, 5};
    Eigen::MatrixXd A(long(rho.size()), 8);
    Eigen::VectorXd b(long(rho.size()));
    for (std::size_t i = 0; i < rho.size(); ++i) {
        for (int k = 0; k < 8; ++k) A(long(i), k) = std::pow(rho[i], pw[k]);
        b(long(i)) = double(vol(rho[i]));
    }
    auto [c, misfit] = least_squares(A, b);
    rv.fit_v0_third = c(0);
    rv.fit_v2 = c(1);
    rv.V_alt = c(2);
    rv.fit_misfit = misfit;
    if (!(std::abs(rv.V - rv.V_alt) <= o.max_disagreement * std::max(1.0, std::abs(rv.V))))
        throw Error("renormalization", "estimator disagreement: V = " + std::to_string(rv.V) +
                                           ", V_alt = " + std::to_string(rv.V_alt));
    return rv;
}

// V after replacing rho by rho' = rho exp(phi(x) rho^2); counterterms use v2' = v2 + int phi dvol_gamma.
inline double renormalized_volume_perturbed(const NormalForm& nf, const FGCoefficients& fg,
                                            const std::function<double(const Vec3&)>& phi, const VolumeOptions& o = {}) {
    const auto& m = nf->chart();
    const auto& bg = fg.geometry;
    const auto& grid = *bg.grid;
    // unit-block angular densities per node
    std::vector<long double> dens(grid.size());
    std::vector<double> ph(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        Mat3 h = zero_mat<double, 3>();
        for (const auto& b : m.blocks) {
            Mat3 u = unit_block(b.kind, grid.nodes[i]);
            for (int p = 0; p < 3; ++p)
                for (int q = 0; q < 3; ++q) h[p][q] += u[p][q];
        }
        dens[i] = grid.weights[i] * std::sqrt(determinant(h));
        ph[i] = phi(grid.nodes[i]);
    }
    double v2p = fg.v2 + integrate(ph, bg);
    auto vol = [&](double eps) {
        // rho' >= eps  <=>  rho >= t with t exp(phi t^2) = eps; radial volumes depend on phi only
        std::map<double, long double> cache;
        long double s = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            auto it = cache.find(ph[i]);
            if (it == cache.end()) {
                long double t = eps, le = std::log((long double)eps);
                for (int k = 0; k < 60; ++k) {
                    long double f = std::log(t) + ph[i] * t * t - le;
                    long double step = f / (1 / t + 2 * ph[i] * t);
                    t -= step;
                    if (std::abs(step) < 1e-19L * t) break;
                }
                it = cache.emplace(ph[i], radial_volume(nf, t)).first;
            }
            s += dens[i] * it->second;
        }
        return s;
    };
    return detail::counterterm_estimate(vol, fg.v0, v2p, o);
}

struct WeylOptions {
    int panels = 4;
    int nodes = 16;
};

struct WeylEnergies {
    double total = 0, plus = 0, minus = 0;
};

// int |W|^2 dvol over the compactified manifold (rho, x) in (0, rho_inner) x grid
inline WeylEnergies weyl_energies(const NormalForm& nf, const BoundaryGrid& grid, const WeylOptions& o = {}) {
    auto field = compactified_field(nf);
    const double top = nf->rho_inner();
    std::vector<double> br;
    for (int p = 0; p <= o.panels; ++p) br.push_back(top * p / o.panels);
    Rule radial = composite_gl(br, o.nodes);
    WeylEnergies e;
    for (std::size_t k = 0; k < radial.x.size(); ++k)
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const Vec3& x = grid.nodes[i];
            auto c = curvature_jet<4>(*field, Vec4{radial.x[k], x[0], x[1], x[2]});
            auto w = weyl_tensor(c.riem, c.ric, c.s, c.g);
            auto [wp, wm] = selfdual_split(w, c.g, compactified_orientation);
            double dv = radial.w[k] * grid.weights[i] * std::sqrt(determinant(c.g));
            e.total += dv * lambda2_norm_sq(w, c.g);
            e.plus += dv * lambda2_norm_sq(wp, c.g);
            e.minus += dv * lambda2_norm_sq(wm, c.g);
        }
    return e;
}

// int over B(R) in the physical chart of f(curvature) dvol_g
template <class F>
double physical_ball_integral(const NormalForm& nf, const BoundaryGrid& grid, double R, F f, int nodes = 16) {
    const auto& m = nf->chart();
    auto field = physical_field(nf);
    return radial_integral<double>(
        m, R,
        [&](double r) {
            double s = 0;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const Vec3& x = grid.nodes[i];
                auto c = curvature_jet<4>(*field, Vec4{r, x[0], x[1], x[2]});
                s += grid.weights[i] * std::sqrt(determinant(c.g)) * f(c);
            }
            return s;
        },
        nodes);
}

inline double weyl_energy_ball(const NormalForm& nf, const BoundaryGrid& grid, double R) {
    return physical_ball_integral(nf, grid, R, [](const Curvature<double, 4>& c) {
        return lambda2_norm_sq(weyl_tensor(c.riem, c.ric, c.s, c.g), c.g);
    });
}

// int_B(R) (|W|^2 - |z|^2/2 + s^2/24 - 6) dvol_g minus the Weyl part: zero for Einstein metrics
inline double non_einstein_integral(const NormalForm& nf, const BoundaryGrid& grid, double R) {
    return physical_ball_integral(nf, grid, R, [](const Curvature<double, 4>& c) {
        return -0.5 * inner(c.z, c.z, c.ginv) + c.s * c.s / 24 - 6;
    });
}

struct GaussBonnetTerms {
    double r = 0, rho = 0;
    double volume = 0;     // vol B(r)
    double cubic = 0;      // (2/3) int prod lambda
    double curvature = 0;  // (1/6) int sum_sigma K lambda
    double total = 0;
};

// The boundary combination of Chern-Gauss-Bonnet on B(r):
//   vol B(r) + (2/3) int_S(r) l1 l2 l3 + (1/6) int_S(r) sum_sigma K_{s1 s2} l_{s3}
// with l_i the principal curvatures of S(r) for the outward normal (positive for convex balls).
inline GaussBonnetTerms gauss_bonnet_boundary(const NormalForm& nf, const BoundaryGrid& grid, double r) {
    const auto& m = nf->chart();
    GaussBonnetTerms t;
    t.r = r;
    t.rho = nf->rho(r);
    using Real = long double;
    t.volume = double(unit_boundary_volume(m, grid) *
                      radial_integral<Real>(m, r, [&](Real x) { return radial_density<Real>(m, x); }));
    auto field = physical_field(nf);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vec3& x = grid.nodes[i];
        auto c = curvature_jet<4>(*field, Vec4{r, x[0], x[1], x[2]});
        Eigen::Matrix3d gt, A;
        double nrm = std::sqrt(c.ginv[0][0]);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                gt(a, b) = c.g[a + 1][b + 1];
                A(a, b) = -c.gamma[0][a + 1][b + 1] / nrm;
            }
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix3d> es(A, gt);
        const auto& lam = es.eigenvalues();
        const auto& V = es.eigenvectors();  // gt-orthonormal columns
        auto K = [&](int p, int q) {
            double s = 0;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    for (int cc = 0; cc < 3; ++cc)
                        for (int d = 0; d < 3; ++d)
                            s += c.riem(a + 1, b + 1, cc + 1, d + 1) * V(a, p) * V(b, q) * V(cc, p) * V(d, q);
            return s;
        };
        double dA = grid.weights[i] * std::sqrt(gt.determinant());
        t.cubic += dA * (2.0 / 3) * lam(0) * lam(1) * lam(2);
        t.curvature += dA * (2.0 / 6) * (K(0, 1) * lam(2) + K(0, 2) * lam(1) + K(1, 2) * lam(0));
    }
    t.total = t.volume + t.cubic + t.curvature;
    return t;
}

struct GaussBonnetTrace {
    std::vector<GaussBonnetTerms> samples;
    std::vector<double> remainder;  // |total - V|
    std::vector<double> noise_floor;
    double slope = 0;     // d log|total - V| / d log(1/rho) over samples above their floor
    int resolved = 0;     // samples above the floor
    bool converged = false;
};

// The floor is the rounding of the cancelling terms plus the uncertainty of V itself
// (pass the estimator spread |V - V_alt|).
inline GaussBonnetTrace gauss_bonnet_trace(const NormalForm& nf, const BoundaryGrid& grid, double V,
                                           const std::vector<double>& rhos, double V_uncertainty = 0) {
    GaussBonnetTrace tr;
    std::vector<double> xs, ys;
    for (double p : rhos) {
        auto t = gauss_bonnet_boundary(nf, grid, nf->r_of_rho(p));
        double rem = std::abs(t.total - V);
        double floor = 1e-13 * std::max({std::abs(t.volume), std::abs(t.cubic), std::abs(t.curvature)}) + 1e-9 + V_uncertainty;
        tr.samples.push_back(t);
        tr.remainder.push_back(rem);
        tr.noise_floor.push_back(floor);
        if (rem > floor) {
            xs.push_back(-std::log(p));
            ys.push_back(std::log(rem));
        }
    }
    tr.resolved = int(xs.size());
    if (xs.size() >= 3) {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
        mx /= double(xs.size());
        my /= double(xs.size());
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) sxy += (xs[i] - mx) * (ys[i] - my), sxx += (xs[i] - mx) * (xs[i] - mx);
        tr.slope = sxy / sxx;
        tr.converged = tr.slope <= -1 + 0.05;
    } else {
        // remainder at rounding level at (almost) every radius: the combination is exact
        tr.slope = -std::numeric_limits<double>::infinity();
        tr.converged = true;
    }
    return tr;
}

struct RenormReport {
    double v0 = 0, v2 = 0, V = 0, V_alt = 0;
    double weyl_energy = 0, weyl_plus = 0, weyl_minus = 0;
    int chi = 0, tau = 0;
    double eta = 0;
    double residual_gb = 0, residual_sig = 0, inequality_margin = 0;
    std::optional<double> V_quoted_formula;         // quoted closed form, where the family has one
    std::optional<double> non_einstein_correction;  // filled only when the FG constraints fail
    std::string provenance;
};

inline RenormReport check_identities(RenormReport r) {
    const double pi2 = std::numbers::pi * std::numbers::pi;
    r.residual_gb = r.weyl_energy / (8 * pi2) - r.chi + 3 * r.V / (4 * pi2);
    r.residual_sig = (r.weyl_plus - r.weyl_minus) / (12 * pi2) - r.tau + r.eta;
    r.inequality_margin = r.chi - 3 * r.V / (4 * pi2) - 1.5 * std::abs(r.tau - r.eta);
    return r;
}

// V <= (4 pi^2/3) chi, with equality for hyperbolic metrics
inline double volume_bound_slack(const RenormReport& r) {
    return 4 * std::numbers::pi * std::numbers::pi / 3 * r.chi - r.V;
}

// V(g_AS) = pi r+^2 (1 - r+^2)/(1 + 3 r+^2) as quoted for the AdS-Schwarzschild family
inline std::optional<double> quoted_volume_formula(const RadialChartMetric& m) {
    if (m.family != "ads_schwarzschild") return std::nullopt;
    double rp = m.r_min;
    return std::numbers::pi * rp * rp * (1 - rp * rp) / (1 + 3 * rp * rp);
}

}  // namespace ahe
