#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "staglf/scheme.hpp"

namespace staglf {

// ---------------------------------------------------------------------------
// Space-time periodic difference solutions: fixed points of the time-1 map
// acting on zero-mean u data, the induced periodic v up to a constant, and
// the discrete effective Hamiltonian.
// ---------------------------------------------------------------------------

struct PeriodicState {
    double c = 0.0;
    StaggeredGrid grid;
    double tol = 0.0;
    GridField u0bar;                  // zero-mean fixed point
    std::vector<GridField> period;    // snapshots k = 0..2K of the last period
    int periods_used = 0;
    double final_residual = 0.0;      // period-to-period L1 distance at stop
    double rho = 0.0;                 // measured geometric decay of residuals
    std::vector<double> residuals;    // per-period history

    double h_bar = 0.0;               // averaged Hamiltonian (method A)
    double h_bar_drift = 0.0;         // minus the per-period drift of v (method B)
    double method_gap = 0.0;

    GridField v0bar;                  // periodic v at k=0 (up to the constant)
    double b_const = 0.0;             // additive constant of the h=0 period map
    double v_residual = 0.0;          // spread of the period discrepancy
};

// Iterate the time-1 map from u_start (default zero) until the
// period-to-period L1 distance drops below tol. Records the decay factor as
// the median ratio of successive residuals and keeps the full last period.
inline PeriodicState find_periodic_u(const FluxModel& model, const StaggeredGrid& g, double c,
                                     double tol, int max_periods,
                                     const std::optional<GridField>& u_start = std::nullopt,
                                     bool cfl_abort = true) {
    if (!(tol > 0.0)) throw NumericError("find_periodic_u: tol must be positive");
    SchemeConfig cfg;
    cfg.model = model;
    cfg.c = c;
    cfg.h = 0.0;
    cfg.cfl_abort = cfl_abort;

    PeriodicState st;
    st.c = c;
    st.grid = g;
    st.tol = tol;

    GridField u = u_start ? *u_start : GridField(g, Parity::Even, 0);
    if (u_start) {
        u.k = 0;
        if (std::abs(u.mean()) > 1e-10)
            throw NumericError("find_periodic_u: starting data must have zero mean");
    }
    const int steps = g.steps_per_period();

    bool converged = false;
    for (int period = 0; period < max_periods; ++period) {
        GridField next = u;
        for (int s = 0; s < steps; ++s) next = step_u(next, cfg);
        next.k = 0;
        const double res = l1_distance(next, u);
        st.residuals.push_back(res);
        u = next;
        st.periods_used = period + 1;
        st.final_residual = res;
        if (res <= tol) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw NumericError("find_periodic_u: no convergence within " + std::to_string(max_periods) +
                           " periods (residual " + fmt_double(st.final_residual) + ")");

    // median ratio of successive residuals, skipping exact zeros
    std::vector<double> ratios;
    for (std::size_t i = 1; i < st.residuals.size(); ++i)
        if (st.residuals[i - 1] > 0.0 && st.residuals[i] > 0.0)
            ratios.push_back(st.residuals[i] / st.residuals[i - 1]);
    if (!ratios.empty()) {
        std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2, ratios.end());
        st.rho = ratios[ratios.size() / 2];
    }

    // record one full period from the converged state
    st.u0bar = u;
    st.period.clear();
    st.period.push_back(u);
    GridField f = u;
    for (int s = 0; s < steps; ++s) {
        f = step_u(f, cfg);
        st.period.push_back(f);
    }
    return st;
}

// Minus the per-period drift of the h=0 v-scheme started from v0, averaged
// over all columns and over the last `avg_last` of `periods` periods.
inline double effective_h_by_drift(const FluxModel& model, const StaggeredGrid& g, double c,
                                   const GridField& v0, int periods = 8, int avg_last = 4,
                                   bool cfl_abort = true) {
    SchemeConfig cfg;
    cfg.model = model;
    cfg.c = c;
    cfg.h = 0.0;
    cfg.cfl_abort = cfl_abort;
    const int steps = g.steps_per_period();
    avg_last = std::min(avg_last, periods);

    GridField v = v0;
    v.k = 0;
    std::vector<double> boundary_means;
    boundary_means.push_back(v.mean());
    for (int p = 0; p < periods; ++p) {
        for (int s = 0; s < steps; ++s) v = step_v(v, cfg);
        v.k = 0;
        boundary_means.push_back(v.mean());
    }
    double drift = 0.0;
    for (int p = periods - avg_last; p < periods; ++p)
        drift += boundary_means[static_cast<std::size_t>(p + 1)] - boundary_means[static_cast<std::size_t>(p)];
    return -drift / avg_last;
}

// Discrete effective Hamiltonian of a converged period, by two independent
// routes: the averaged Hamiltonian over the period, and the drift of the
// h=0 v-scheme. Their gap is recorded; disagreement beyond 10*tol means the
// periodic state has not actually converged.
inline void effective_hamiltonian(PeriodicState& st, const FluxModel& model, int drift_periods = 8,
                                  bool cfl_abort = true) {
    if (st.period.empty()) throw NumericError("effective_hamiltonian: need a converged period");
    const StaggeredGrid& g = st.grid;
    const double w = 2.0 * g.dx() * g.dt();
    double avg = 0.0;
    for (int k = 0; k < g.steps_per_period(); ++k) {
        const GridField& u = st.period[static_cast<std::size_t>(k)];
        for (int i = 0; i < g.N; ++i)
            avg += model.H(u.x_of(i), g.t_of(k), st.c + u.vals[static_cast<std::size_t>(i)]) * w;
    }
    st.h_bar = avg;
    st.h_bar_drift = effective_h_by_drift(model, g, st.c, v_from_u(st.u0bar), drift_periods, 4, cfl_abort);
    st.method_gap = std::abs(st.h_bar - st.h_bar_drift);
}

// Builds the periodic v from the periodic u, steps one period with
// h = h_bar(c), and verifies the return differs by a spatially constant
// field; the constant is absorbed into b_const.
inline void periodic_v(PeriodicState& st, const FluxModel& model, double residual_factor = 50.0,
                       bool cfl_abort = true) {
    SchemeConfig cfg;
    cfg.model = model;
    cfg.c = st.c;
    cfg.h = st.h_bar;
    cfg.cfl_abort = cfl_abort;
    const StaggeredGrid& g = st.grid;
    st.v0bar = v_from_u(st.u0bar);
    GridField v = st.v0bar;
    for (int s = 0; s < g.steps_per_period(); ++s) v = step_v(v, cfg);
    v.k = 0;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < v.vals.size(); ++i) {
        const double d = v.vals[i] - st.v0bar.vals[i];
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    st.v_residual = hi - lo;
    // with the h=0 baseline, the additive period constant equals h_bar up to
    // the leftover drift of the h = h_bar run
    st.b_const = st.h_bar - 0.5 * (hi + lo);
    const double allow = residual_factor * std::max(st.tol, 1e-14);
    if (st.v_residual > allow)
        throw NumericError("periodic_v: period discrepancy is not spatially constant (spread " +
                           fmt_double(st.v_residual) + ")");
}

inline PeriodicState periodic_state(const FluxModel& model, const StaggeredGrid& g, double c,
                                    double tol, int max_periods, bool cfl_abort = true) {
    PeriodicState st = find_periodic_u(model, g, c, tol, max_periods, std::nullopt, cfl_abort);
    effective_hamiltonian(st, model, 8, cfl_abort);
    periodic_v(st, model, 50.0, cfl_abort);
    return st;
}

// ---------------------------------------------------------------------------
// c-sweeps of the effective Hamiltonian with convexity diagnostics.
// ---------------------------------------------------------------------------

struct EffectiveCurve {
    std::vector<double> c;
    std::vector<double> h_bar;
    std::vector<double> method_gap;
    std::vector<double> second_diff;   // size c.size()-2 where defined
    std::vector<std::string> errors;   // empty string = ok
    double min_second_diff = 0.0;

    bool all_ok() const {
        for (const auto& e : errors)
            if (!e.empty()) return false;
        return true;
    }
};

inline EffectiveCurve sweep(const FluxModel& model, const StaggeredGrid& g,
                            const std::vector<double>& c_list, double tol, int max_periods,
                            int threads = 1, bool cfl_abort = true) {
    if (c_list.size() < 3) throw NumericError("sweep: need at least 3 c values");
    for (std::size_t i = 1; i < c_list.size(); ++i)
        if (!(c_list[i] > c_list[i - 1])) throw NumericError("sweep: c_list must be increasing");

    EffectiveCurve curve;
    curve.c = c_list;
    curve.h_bar.assign(c_list.size(), 0.0);
    curve.method_gap.assign(c_list.size(), 0.0);
    curve.errors.assign(c_list.size(), std::string());

    parallel_for(c_list.size(), threads, [&](std::size_t i) {
        try {
            PeriodicState st = find_periodic_u(model, g, c_list[i], tol, max_periods,
                                               std::nullopt, cfl_abort);
            effective_hamiltonian(st, model, 8, cfl_abort);
            curve.h_bar[i] = st.h_bar;
            curve.method_gap[i] = st.method_gap;
        } catch (const std::exception& e) {
            curve.errors[i] = e.what();
        }
    });

    curve.second_diff.assign(c_list.size() >= 2 ? c_list.size() - 2 : 0, 0.0);
    double mn = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < c_list.size(); ++i) {
        const double d2 = curve.h_bar[i + 1] - 2.0 * curve.h_bar[i] + curve.h_bar[i - 1];
        curve.second_diff[i - 1] = d2;
        mn = std::min(mn, d2);
    }
    curve.min_second_diff = mn;
    return curve;
}

}  // namespace staglf
