#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "staglf/common.hpp"

namespace staglf {

// ---------------------------------------------------------------------------
// Flux functions H(x,t,p), periodic with period 1 in x and t, strictly convex
// and superlinear in p, together with their first and second derivatives.
// ---------------------------------------------------------------------------

using FluxFn = std::function<double(double, double, double)>;

struct FluxModel {
    std::string name;
    FluxFn H, Hp, Hx, Hpp, Hxp, Hxx;

    double h(double x, double t, double p) const { return H(x, t, p); }
    double hp(double x, double t, double p) const { return Hp(x, t, p); }
    double hx(double x, double t, double p) const { return Hx(x, t, p); }
    double hpp(double x, double t, double p) const { return Hpp(x, t, p); }
    double hxp(double x, double t, double p) const { return Hxp(x, t, p); }
    double hxx(double x, double t, double p) const { return Hxx(x, t, p); }
};

// H = p^2/2
inline FluxModel make_quadratic() {
    FluxModel m;
    m.name = "quadratic";
    m.H = [](double, double, double p) { return 0.5 * p * p; };
    m.Hp = [](double, double, double p) { return p; };
    m.Hx = [](double, double, double) { return 0.0; };
    m.Hpp = [](double, double, double) { return 1.0; };
    m.Hxp = [](double, double, double) { return 0.0; };
    m.Hxx = [](double, double, double) { return 0.0; };
    return m;
}

// H = p^2/2 + A cos(2 pi x)
inline FluxModel make_mechanical(double amplitude) {
    const double a = amplitude;
    const double w = 2.0 * M_PI;
    FluxModel m;
    m.name = "mechanical";
    m.H = [a, w](double x, double, double p) { return 0.5 * p * p + a * std::cos(w * x); };
    m.Hp = [](double, double, double p) { return p; };
    m.Hx = [a, w](double x, double, double) { return -a * w * std::sin(w * x); };
    m.Hpp = [](double, double, double) { return 1.0; };
    m.Hxp = [](double, double, double) { return 0.0; };
    m.Hxx = [a, w](double x, double, double) { return -a * w * w * std::cos(w * x); };
    return m;
}

// H = p^2/2 + A cos(2 pi x) cos(2 pi t)
inline FluxModel make_timedep(double amplitude) {
    const double a = amplitude;
    const double w = 2.0 * M_PI;
    FluxModel m;
    m.name = "timedep";
    m.H = [a, w](double x, double t, double p) {
        return 0.5 * p * p + a * std::cos(w * x) * std::cos(w * t);
    };
    m.Hp = [](double, double, double p) { return p; };
    m.Hx = [a, w](double x, double t, double) { return -a * w * std::sin(w * x) * std::cos(w * t); };
    m.Hpp = [](double, double, double) { return 1.0; };
    m.Hxp = [](double, double, double) { return 0.0; };
    m.Hxx = [a, w](double x, double t, double) { return -a * w * w * std::cos(w * x) * std::cos(w * t); };
    return m;
}

// H = p^4/4 + A cos(2 pi x). Hpp vanishes at p = 0, so strict convexity holds
// only away from the origin; the bisection fallback covers the flat spot.
inline FluxModel make_quartic(double amplitude) {
    const double a = amplitude;
    const double w = 2.0 * M_PI;
    FluxModel m;
    m.name = "quartic";
    m.H = [a, w](double x, double, double p) { return 0.25 * p * p * p * p + a * std::cos(w * x); };
    m.Hp = [](double, double, double p) { return p * p * p; };
    m.Hx = [a, w](double x, double, double) { return -a * w * std::sin(w * x); };
    m.Hpp = [](double, double, double p) { return 3.0 * p * p; };
    m.Hxp = [](double, double, double) { return 0.0; };
    m.Hxx = [a, w](double x, double, double) { return -a * w * w * std::cos(w * x); };
    return m;
}

inline FluxModel make_model(const std::string& id, double amplitude) {
    if (id == "quadratic") return make_quadratic();
    if (id == "mechanical") return make_mechanical(amplitude);
    if (id == "timedep") return make_timedep(amplitude);
    if (id == "quartic") return make_quartic(amplitude);
    throw NumericError("unknown flux model id: " + id);
}

// ---------------------------------------------------------------------------
// Legendre transform L(x,t,xi) = sup_p { xi p - H(x,t,p) }.
//
// Strict convexity makes Hp strictly increasing, so the maximizer is the
// unique root of Hp(p) = xi. Newton with a bisection safeguard on a bracket
// grown geometrically from p = xi.
// ---------------------------------------------------------------------------

struct LegendreResult {
    double value = 0.0;     // L(x,t,xi)
    double p_star = 0.0;    // maximizer
    int iterations = 0;
    double residual = 0.0;  // |Hp(x,t,p_star) - xi|
};

inline LegendreResult legendre(const FluxModel& m, double x, double t, double xi,
                               double tol = 1e-12, int max_iter = 200) {
    auto g = [&](double p) { return m.hp(x, t, p) - xi; };

    double lo = xi, hi = xi;
    double step = std::max(1.0, std::abs(xi));
    int grow = 0;
    if (g(xi) > 0.0) {
        while (g(lo) > 0.0) {
            hi = lo;
            lo -= step;
            step *= 2.0;
            if (++grow > 200) throw NumericError("legendre: bracket growth failed (model violates convexity/superlinearity?)");
        }
    } else {
        while (g(hi) < 0.0) {
            lo = hi;
            hi += step;
            step *= 2.0;
            if (++grow > 200) throw NumericError("legendre: bracket growth failed (model violates convexity/superlinearity?)");
        }
    }

    LegendreResult res;
    double p = 0.5 * (lo + hi);
    double gp = g(p);
    for (int it = 0; it < max_iter; ++it) {
        res.iterations = it + 1;
        if (std::abs(gp) <= tol) break;
        if (gp > 0.0) hi = p; else lo = p;
        const double d2 = m.hpp(x, t, p);
        double pn = (d2 > 0.0) ? p - gp / d2 : std::numeric_limits<double>::quiet_NaN();
        if (!(pn > lo && pn < hi)) pn = 0.5 * (lo + hi);  // bisection fallback
        p = pn;
        gp = g(p);
        if (it + 1 == max_iter && std::abs(gp) > tol)
            throw NumericError("legendre: no convergence; model violates (A2)/(A3) on the bracket");
    }
    res.p_star = p;
    res.residual = std::abs(gp);
    res.value = xi * p - m.h(x, t, p);
    return res;
}

// L^{(c)}(x,t,xi) = L(x,t,xi) - c xi, the transform of H(x,t,c+.)
inline double lagrangian_shifted(const FluxModel& m, double x, double t, double xi, double c,
                                 double tol = 1e-12) {
    return legendre(m, x, t, xi, tol).value - c * xi;
}

// L_xi(x,t,xi) = p_star(x,t,xi); the shifted version subtracts c.
inline double lagrangian_slope(const FluxModel& m, double x, double t, double xi,
                               double tol = 1e-12) {
    return legendre(m, x, t, xi, tol).p_star;
}

// L_x(x,t,xi) = -Hx(x,t,p_star) by the envelope identity; shifting by c does
// not change it.
inline double lagrangian_xderiv(const FluxModel& m, double x, double t, double xi,
                                double tol = 1e-12) {
    return -m.hx(x, t, legendre(m, x, t, xi, tol).p_star);
}

// ---------------------------------------------------------------------------
// Standing-assumption checks on a sampling lattice.
// ---------------------------------------------------------------------------

struct AssumptionReport {
    bool periodic_ok = false;      // (A1) periodicity in x and t
    bool derivatives_ok = false;   // analytic derivatives match central differences
    bool convex_ok = false;        // (A2)
    bool superlinear_ok = false;   // (A3), probed at the p-range ends
    double min_hpp = 0.0;
    double alpha = 0.0;            // best-fit (A4) constant: max |L_x| / (|L|+1)
    bool all() const { return periodic_ok && derivatives_ok && convex_ok && superlinear_ok; }
};

inline AssumptionReport verify_assumptions(const FluxModel& m, int sample_density,
                                           double c_lo, double c_hi,
                                           double p_lo, double p_hi) {
    if (sample_density < 8) throw NumericError("verify_assumptions: sample_density must be >= 8");
    AssumptionReport rep;
    const int n = sample_density;
    double per_err = 0.0, der_err = 0.0;
    double min_hpp = std::numeric_limits<double>::infinity();
    const double fd = 1e-5;

    for (int ix = 0; ix < n; ++ix) {
        const double x = static_cast<double>(ix) / n;
        for (int it = 0; it < n; ++it) {
            const double t = static_cast<double>(it) / n;
            for (int ip = 0; ip < n; ++ip) {
                const double p = p_lo + (p_hi - p_lo) * ip / (n - 1.0);
                per_err = std::max(per_err, std::abs(m.h(x + 1.0, t, p) - m.h(x, t, p)));
                per_err = std::max(per_err, std::abs(m.h(x, t + 1.0, p) - m.h(x, t, p)));
                const double hp_fd = (m.h(x, t, p + fd) - m.h(x, t, p - fd)) / (2.0 * fd);
                const double hx_fd = (m.h(x + fd, t, p) - m.h(x - fd, t, p)) / (2.0 * fd);
                der_err = std::max(der_err, std::abs(hp_fd - m.hp(x, t, p)));
                der_err = std::max(der_err, std::abs(hx_fd - m.hx(x, t, p)));
                min_hpp = std::min(min_hpp, m.hpp(x, t, p));
            }
        }
    }
    rep.periodic_ok = per_err <= 1e-10;
    rep.derivatives_ok = der_err <= 1e-6;  // O(fd^2) central differences
    rep.min_hpp = min_hpp;
    rep.convex_ok = min_hpp > 0.0;

    // (A3): H/|p| must keep growing toward the window ends.
    double worst = std::numeric_limits<double>::infinity();
    const double pbig = std::max(std::abs(p_lo), std::abs(p_hi)) + 8.0;
    for (int ix = 0; ix < n; ++ix) {
        const double x = static_cast<double>(ix) / n;
        for (double s : {-1.0, 1.0}) {
            const double r2 = m.h(x, 0.37, s * pbig) / pbig;
            const double r1 = m.h(x, 0.37, s * pbig / 2.0) / (pbig / 2.0);
            worst = std::min(worst, r2 - r1);
        }
    }
    rep.superlinear_ok = worst > 0.0;

    // (A4) fit: only meaningful when (A2) holds, otherwise the transform is
    // ill-defined and we skip it.
    if (rep.convex_ok) {
        double alpha = 0.0;
        const double xi_hi = std::max({1.0, std::abs(c_lo), std::abs(c_hi)}) + 2.0;
        for (int ix = 0; ix < n; ++ix) {
            const double x = static_cast<double>(ix) / n;
            for (int it = 0; it < n; ++it) {
                const double t = static_cast<double>(it) / n;
                for (int ii = 0; ii < n; ++ii) {
                    const double xi = -xi_hi + 2.0 * xi_hi * ii / (n - 1.0);
                    const LegendreResult lr = legendre(m, x, t, xi);
                    const double lx = -m.hx(x, t, lr.p_star);
                    alpha = std::max(alpha, std::abs(lx) / (std::abs(lr.value) + 1.0));
                }
            }
        }
        rep.alpha = alpha;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// A-priori constants. All extrema are lattice approximations; sups are
// multiplied and infs divided by a safety inflation factor (default 1.1).
// ---------------------------------------------------------------------------

struct AprioriConstants {
    double t = 1.0;         // time horizon the C-constants refer to
    double lambda1 = 1.0;   // configured CFL-window constant
    double c_lo = 0.0, c_hi = 0.0;
    double r = 1.0;
    double inflation = 1.1;

    double C1 = 0.0;
    double C2 = 0.0;
    double C3 = 0.0;        // = beta1(t)
    double u_star = 0.0;    // sup of |shifted Lagrangian slope| over |xi| <= 1/lambda1
    double H_pp_star = 0.0; // inf of Hpp over the |u| <= u_star window
    double H_xp_star = 0.0;
    double H_xx_star = 0.0;
    double eta = 0.0;
    double E_star = 0.0;

    double beta1() const { return C3; }
};

namespace detail {

// Lattice sweep over x,t in [0,1) and c in [c_lo,c_hi].
template <typename F>
void sweep_xtc(int density, double c_lo, double c_hi, F&& f) {
    const int nc = (c_hi > c_lo) ? density : 1;
    for (int ix = 0; ix < density; ++ix) {
        const double x = static_cast<double>(ix) / density;
        for (int it = 0; it < density; ++it) {
            const double t = static_cast<double>(it) / density;
            for (int ic = 0; ic < nc; ++ic) {
                const double c = (nc == 1) ? c_lo : c_lo + (c_hi - c_lo) * ic / (nc - 1.0);
                f(x, t, c);
            }
        }
    }
}

}  // namespace detail

inline AprioriConstants apriori_constants(const FluxModel& m, double t_max, double lambda1,
                                          double c_lo, double c_hi, double r,
                                          int density = 64, double inflation = 1.1) {
    if (!(t_max > 0.0) || !(lambda1 > 0.0)) throw NumericError("apriori_constants: t_max and lambda1 must be positive");
    if (c_hi < c_lo) throw NumericError("apriori_constants: degenerate c window");
    AprioriConstants k;
    k.t = t_max;
    k.lambda1 = lambda1;
    k.c_lo = c_lo;
    k.c_hi = c_hi;
    k.r = r;
    k.inflation = inflation;

    // C1(t) = sup_{|xi| <= 1/t} |L^{(c)}| * t
    double c1 = 0.0;
    detail::sweep_xtc(density, c_lo, c_hi, [&](double x, double t, double c) {
        for (int i = 0; i < density; ++i) {
            const double xi = -1.0 / t_max + 2.0 / t_max * i / (density - 1.0);
            c1 = std::max(c1, std::abs(lagrangian_shifted(m, x, t, xi, c)));
        }
    });
    k.C1 = c1 * t_max * inflation;

    // C2(t): largest speed a minimizer can have at its cheapest instant.
    // Doubling + bisection on Xi s.t. min over (x,t,c) of L^{(c)}(.,.,+-Xi)
    // exceeds C1/t.
    auto min_lc_at = [&](double xi) {
        double lo = std::numeric_limits<double>::infinity();
        detail::sweep_xtc(std::max(8, density / 4), c_lo, c_hi, [&](double x, double t, double c) {
            lo = std::min(lo, lagrangian_shifted(m, x, t, xi, c));
        });
        return lo;
    };
    const double level = k.C1 / t_max;
    double xi_hi = std::max(1.0, 1.0 / t_max);
    int grow = 0;
    while (std::min(min_lc_at(xi_hi), min_lc_at(-xi_hi)) <= level) {
        xi_hi *= 2.0;
        if (++grow > 60) throw NumericError("apriori_constants: C2 search failed; (A3) violated?");
    }
    double xi_lo = 0.0;
    for (int it = 0; it < 50; ++it) {
        const double mid = 0.5 * (xi_lo + xi_hi);
        if (std::min(min_lc_at(mid), min_lc_at(-mid)) <= level) xi_lo = mid; else xi_hi = mid;
    }
    k.C2 = xi_hi * inflation;

    // alpha1, L_star and the slope sup feeding C3.
    // inf_xi L^{(c)}(x,t,xi) = -H(x,t,c), so L_star needs no xi sweep.
    double alpha1 = 0.0, h_sup = 0.0, slope_sup = 0.0;
    const double xi_win = std::max(k.C2, 1.0 / t_max);
    detail::sweep_xtc(density, c_lo, c_hi, [&](double x, double t, double c) {
        h_sup = std::max(h_sup, m.h(x, t, c));
        for (int i = 0; i < density; ++i) {
            const double xi = -xi_win + 2.0 * xi_win * i / (density - 1.0);
            const LegendreResult lr = legendre(m, x, t, xi);
            const double lc = lr.value - c * xi;
            const double lx = -m.hx(x, t, lr.p_star);
            alpha1 = std::max(alpha1, std::abs(lx) / (std::abs(lc) + 1.0));
            slope_sup = std::max(slope_sup, std::abs(lr.p_star - c));
        }
    });
    alpha1 *= inflation;
    const double l_star = std::max(0.0, h_sup) * inflation;
    k.C3 = alpha1 * (2.0 * l_star + 1.0) * t_max + alpha1 * k.C1 + slope_sup * inflation;

    // u_star = sup |L^{(c)}_xi| over |xi| <= 1/lambda1.
    double us = 0.0;
    detail::sweep_xtc(density, c_lo, c_hi, [&](double x, double t, double c) {
        for (int i = 0; i < density; ++i) {
            const double xi = -1.0 / lambda1 + 2.0 / lambda1 * i / (density - 1.0);
            us = std::max(us, std::abs(legendre(m, x, t, xi).p_star - c));
        }
    });
    k.u_star = us * inflation;

    // H extrema over the |u| <= u_star window.
    double hpp_inf = std::numeric_limits<double>::infinity();
    double hxp_sup = 0.0, hxx_sup = 0.0;
    detail::sweep_xtc(density, c_lo, c_hi, [&](double x, double t, double c) {
        for (int i = 0; i < density; ++i) {
            const double u = -k.u_star + 2.0 * k.u_star * i / (density - 1.0);
            hpp_inf = std::min(hpp_inf, std::abs(m.hpp(x, t, c + u)));
            hxp_sup = std::max(hxp_sup, std::abs(m.hxp(x, t, c + u)));
            hxx_sup = std::max(hxx_sup, std::abs(m.hxx(x, t, c + u)));
        }
    });
    k.H_pp_star = hpp_inf / inflation;
    k.H_xp_star = hxp_sup * inflation;
    k.H_xx_star = hxx_sup * inflation;
    if (!(k.H_pp_star > 0.0)) throw NumericError("apriori_constants: H_pp_star must be positive (A2)");

    k.eta = std::max(2.0 * k.H_xp_star + k.H_pp_star, 0.5 * k.H_pp_star + k.H_xx_star);
    const double q = k.H_xp_star / k.H_pp_star;
    k.E_star = 2.0 * q + std::sqrt(4.0 * q * q + 2.0 * k.H_xx_star / k.H_pp_star);
    return k;
}

}  // namespace staglf
