#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "staglf/flux.hpp"
#include "staglf/grid.hpp"

namespace staglf {

struct SchemeConfig {
    FluxModel model;
    double c = 0.0;        // momentum shift
    double h = 0.0;        // right-hand constant of the v-equation
    bool cfl_abort = true; // abort (throw) vs warn on CFL violation
};

struct CflViolation : NumericError {
    int k;
    int m;
    double speed;  // |lambda Hp| at the offending column
    CflViolation(int step, int col, double s)
        : NumericError("CFL violation at step k=" + std::to_string(step) + ", column m=" +
                       std::to_string(col) + ", |lambda*Hp| = " + fmt_double(s)),
          k(step), m(col), speed(s) {}
};

// min over columns of 1 - |lambda Hp(x_m, t_k, c + u_m)|; positive iff the
// CFL condition holds strictly. Works for either parity (odd fields are
// differenced first).
inline double cfl_margin(const GridField& f, const SchemeConfig& cfg, int* argmin = nullptr) {
    const StaggeredGrid& g = f.grid;
    const double lam = g.lambda();
    const double tk = f.t();
    double margin = std::numeric_limits<double>::infinity();
    const GridField* u = &f;
    GridField tmp;
    if (f.parity == Parity::Odd) {
        tmp = u_from_v(f);
        u = &tmp;
    }
    for (int i = 0; i < g.N; ++i) {
        const int m = u->col_of(i);
        const double a = std::abs(lam * cfg.model.hp(g.x_of(m), tk, cfg.c + u->vals[static_cast<std::size_t>(i)]));
        if (1.0 - a < margin) {
            margin = 1.0 - a;
            if (argmin) *argmin = m;
        }
    }
    return margin;
}

// One Lax-Friedrichs step on the even grid:
//   u^{k+1}_{m+1} = (u^k_m + u^k_{m+2})/2
//                 - (lambda/2) [H(x_{m+2}, t_k, c+u^k_{m+2}) - H(x_m, t_k, c+u^k_m)]
inline GridField step_u(const GridField& u, const SchemeConfig& cfg) {
    if (u.parity != Parity::Even) throw NumericError("step_u: even field expected");
    const StaggeredGrid& g = u.grid;
    if (cfg.cfl_abort) {
        int col = 0;
        const double margin = cfl_margin(u, cfg, &col);
        if (margin <= 0.0)
            throw CflViolation(u.k, col, 1.0 - margin);
    }
    const double lam = g.lambda();
    const double tk = u.t();
    GridField out(g, Parity::Even, u.k + 1);
    std::vector<double> flux(static_cast<std::size_t>(g.N));
    for (int i = 0; i < g.N; ++i)
        flux[static_cast<std::size_t>(i)] =
            cfg.model.h(u.x_of(i), tk, cfg.c + u.vals[static_cast<std::size_t>(i)]);
    for (int i = 0; i < g.N; ++i) {
        const int inext = (i + 1) % g.N;
        const double avg = 0.5 * (u.vals[static_cast<std::size_t>(i)] + u.vals[static_cast<std::size_t>(inext)]);
        const double dH = flux[static_cast<std::size_t>(inext)] - flux[static_cast<std::size_t>(i)];
        out.at_col(u.col_of(i) + 1) = avg - 0.5 * lam * dH;
    }
    return out;
}

// One step on the odd grid:
//   v^{k+1}_m = (v^k_{m-1} + v^k_{m+1})/2 - dt [H(x_m, t_k, c + D_x v^k_{m+1}) - h]
inline GridField step_v(const GridField& v, const SchemeConfig& cfg) {
    if (v.parity != Parity::Odd) throw NumericError("step_v: odd field expected");
    const StaggeredGrid& g = v.grid;
    if (cfg.cfl_abort) {
        int col = 0;
        const double margin = cfl_margin(v, cfg, &col);
        if (margin <= 0.0)
            throw CflViolation(v.k, col, 1.0 - margin);
    }
    const double dt = g.dt();
    const double inv2dx = 1.0 / (2.0 * g.dx());
    const double tk = v.t();
    GridField out(g, Parity::Odd, v.k + 1);
    for (int i = 0; i < g.N; ++i) {
        const int m = out.col_of(i);  // m+k even
        const double vl = v.at_col(m - 1);
        const double vr = v.at_col(m + 1);
        const double slope = (vr - vl) * inv2dx;
        out.vals[static_cast<std::size_t>(i)] =
            0.5 * (vl + vr) - dt * (cfg.model.h(g.x_of(m), tk, cfg.c + slope) - cfg.h);
    }
    return out;
}

inline GridField step(const GridField& f, const SchemeConfig& cfg) {
    return f.parity == Parity::Even ? step_u(f, cfg) : step_v(f, cfg);
}

// max of forward differences (u_{m+2} - u_m) / 2dx; the one-sided Lipschitz
// indicator E^k.
inline double one_sided_max(const GridField& u) {
    if (u.parity != Parity::Even) throw NumericError("one_sided_max: even field expected");
    const double inv2dx = 1.0 / (2.0 * u.grid.dx());
    double e = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < u.grid.N; ++i) {
        const int inext = (i + 1) % u.grid.N;
        e = std::max(e, (u.vals[static_cast<std::size_t>(inext)] - u.vals[static_cast<std::size_t>(i)]) * inv2dx);
    }
    return e;
}

struct StepDiag {
    int k = 0;
    double t = 0.0;
    double mean = 0.0;
    double max_abs = 0.0;
    double cfl_margin = 0.0;
    double E_k = 0.0;
};

struct Trajectory {
    std::vector<GridField> snapshots;  // thinned by record_every, always includes k=0 and k_end
    std::vector<StepDiag> diag;        // one entry per time level, k = 0..k_end
    int record_every = 1;

    const GridField& initial() const { return snapshots.front(); }
    const GridField& final() const { return snapshots.back(); }

    // snapshot at time level k (requires it was recorded)
    const GridField& at_step(int k) const {
        for (const auto& s : snapshots)
            if (s.k == k) return s;
        throw NumericError("Trajectory: step " + std::to_string(k) + " not recorded");
    }

    bool has_step(int k) const {
        for (const auto& s : snapshots)
            if (s.k == k) return true;
        return false;
    }

    // Step reconstruction u(x,t) from the recorded history (even parity runs).
    double eval_u(double x, double t) const {
        return eval_u_field(at_step(step_index(t)), x);
    }

    // Space-linear, time-step reconstruction v(x,t) (odd parity runs).
    double eval_v(double x, double t) const {
        return eval_v_field(at_step(step_index(t)), x);
    }

    int step_index(double t) const {
        const StaggeredGrid& g = snapshots.front().grid;
        const int k_end = snapshots.back().k;
        if (t < -1e-12 || t > g.t_of(k_end) + 1e-12)
            throw NumericError("Trajectory: time outside stored history");
        int k = static_cast<int>(std::floor(t / g.dt() + 1e-12));
        return std::min(k, k_end);
    }
};

inline StepDiag make_diag(const GridField& f, const SchemeConfig& cfg) {
    StepDiag d;
    d.k = f.k;
    d.t = f.t();
    d.cfl_margin = cfl_margin(f, cfg);
    if (f.parity == Parity::Even) {
        d.mean = f.mean();
        d.max_abs = f.max_abs();
        d.E_k = one_sided_max(f);
    } else {
        const GridField u = u_from_v(f);
        d.mean = u.mean();
        d.max_abs = u.max_abs();
        d.E_k = one_sided_max(u);
    }
    return d;
}

// March k_end steps recording diagnostics every step and snapshots every
// record_every steps (first and last always kept).
inline Trajectory solve(const SchemeConfig& cfg, const GridField& f0, int k_end,
                        int record_every = 1) {
    if (k_end < 0) throw NumericError("solve: k_end must be >= 0");
    Trajectory traj;
    traj.record_every = std::max(1, record_every);
    GridField f = f0;
    traj.snapshots.push_back(f);
    traj.diag.push_back(make_diag(f, cfg));
    for (int s = 0; s < k_end; ++s) {
        f = step(f, cfg);
        if ((f.k % traj.record_every) == 0 || f.k == k_end) traj.snapshots.push_back(f);
        traj.diag.push_back(make_diag(f, cfg));
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Hypotheses of the one-sided Lipschitz decay estimates. The first condition
// tightens plain CFL by an H_xp * 2dx term; the others couple dt and lambda
// to the a-priori constants. Violations are reported, not fatal: the scheme
// may still run, only the decay envelopes lose their guarantee.
// ---------------------------------------------------------------------------

struct EntropyConditionCheck {
    bool cfl_tightened = false;  // sup lambda (|Hp| + H_xp* 2dx) < 1
    bool lambda_vs_r = false;    // lambda <= (1 - 2 H_xp* dt) / (r H_pp* + (1+H_pp*) dx)
    bool dt_small = false;       // dt < min{ 1/(2 eta), 1/(E* H_pp* + 2 H_xp*) }
    double sup_speed = 0.0;
    double lambda_limit = 0.0;
    double dt_limit = 0.0;
    bool all() const { return cfl_tightened && lambda_vs_r && dt_small; }
};

inline EntropyConditionCheck check_entropy_conditions(const FluxModel& m, const StaggeredGrid& g,
                                                      const AprioriConstants& k, int density = 64) {
    EntropyConditionCheck chk;
    double sup_hp = 0.0;
    detail::sweep_xtc(density, k.c_lo, k.c_hi, [&](double x, double t, double c) {
        for (int i = 0; i < density; ++i) {
            const double u = -k.u_star + 2.0 * k.u_star * i / (density - 1.0);
            sup_hp = std::max(sup_hp, std::abs(m.hp(x, t, c + u)));
        }
    });
    chk.sup_speed = g.lambda() * (sup_hp + k.H_xp_star * 2.0 * g.dx());
    chk.cfl_tightened = chk.sup_speed < 1.0;

    chk.lambda_limit = (1.0 - 2.0 * k.H_xp_star * g.dt()) /
                       (k.r * k.H_pp_star + (1.0 + k.H_pp_star) * g.dx());
    chk.lambda_vs_r = g.lambda() <= chk.lambda_limit;

    const double denom = k.E_star * k.H_pp_star + 2.0 * k.H_xp_star;
    const double lim2 = denom > 0.0 ? 1.0 / denom : std::numeric_limits<double>::infinity();
    chk.dt_limit = std::min(1.0 / (2.0 * k.eta), lim2);
    chk.dt_small = g.dt() < chk.dt_limit;
    return chk;
}

}  // namespace staglf
