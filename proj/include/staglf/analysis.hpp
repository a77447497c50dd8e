#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "staglf/periodic.hpp"
#include "staglf/stochastic.hpp"

namespace staglf {

// ---------------------------------------------------------------------------
// Reference solutions.
// ---------------------------------------------------------------------------

struct ReferenceSolution {
    enum class Tag { FineMesh, HopfLax, Characteristics };
    Tag tag = Tag::FineMesh;
    std::function<double(double, double)> u;  // evaluators; either may be empty
    std::function<double(double, double)> v;
    double dx_ref = 0.0;
    std::function<GridField(double)> u_field_at;  // fine-mesh only: exact step data
};

struct HopfLaxValue {
    double value = 0.0;   // v(x,t)
    double y_star = 0.0;  // minimizing foot point
    double u = 0.0;       // slope of the shifted Lagrangian at the optimal velocity
};

namespace detail {

inline void require_xt_independent(const FluxModel& m) {
    for (int i = 0; i < 8; ++i) {
        const double p = -2.0 + 0.5 * i;
        const double ref = m.h(0.0, 0.0, p);
        for (int s = 1; s < 5; ++s) {
            const double x = counter_uniform(91, i, s);
            const double t = counter_uniform(92, i, s);
            if (std::abs(m.h(x, t, p) - ref) > 1e-12 * (1.0 + std::abs(ref)))
                throw NumericError("hopf_lax_reference: model depends on x or t");
        }
    }
}

}  // namespace detail

// Velocity window large enough to contain every minimizing straight line for
// data with |v0'| <= r.
inline double hopf_lax_velocity_bound(const FluxModel& m, double c, double r) {
    double b = 0.0;
    for (int i = 0; i <= 32; ++i) {
        const double u = -(r + 0.5) + 2.0 * (r + 0.5) * i / 32.0;
        b = std::max(b, std::abs(m.hp(0.0, 0.0, c + u)));
    }
    return b + 1.0;
}

// Value function for x,t-independent fluxes: minimizers are straight lines,
// so v(x,t) = min_y { t L^{(c)}((x-y)/t) + v0(y) } + h t with y over lifts of
// one period. Coarse scan plus local grid refinement around the best cell.
inline HopfLaxValue hopf_lax_reference(const FluxModel& m, const std::function<double(double)>& v0,
                                       double c, double x, double t, int y_resolution = 512,
                                       double h = 0.0, double vel_bound = 0.0) {
    detail::require_xt_independent(m);
    if (!(t > 0.0)) throw NumericError("hopf_lax_reference: t must be positive");
    if (vel_bound <= 0.0) vel_bound = hopf_lax_velocity_bound(m, c, 2.0);
    const double w = std::max(0.51, vel_bound * t);

    auto objective = [&](double y) {
        return t * lagrangian_shifted(m, 0.0, 0.0, (x - y) / t, c) + v0(wrap_unit(y));
    };

    double lo = x - w, hi = x + w;
    int n = std::max(16, y_resolution);
    double best_y = lo, best = std::numeric_limits<double>::infinity();
    for (int round = 0; round < 4; ++round) {
        const double step = (hi - lo) / n;
        for (int i = 0; i <= n; ++i) {
            const double y = lo + i * step;
            const double val = objective(y);
            if (val < best) {
                best = val;
                best_y = y;
            }
        }
        const double span = 2.0 * step;
        lo = best_y - span;
        hi = best_y + span;
        n = 64;
    }

    HopfLaxValue out;
    out.value = best + h * t;
    out.y_star = best_y;
    const double xi = (x - best_y) / t;
    out.u = legendre(m, 0.0, 0.0, xi).p_star - c;
    return out;
}

inline ReferenceSolution make_hopf_lax_reference(const FluxModel& m,
                                                 const std::function<double(double)>& v0, double c,
                                                 double h = 0.0, int y_resolution = 512) {
    ReferenceSolution ref;
    ref.tag = ReferenceSolution::Tag::HopfLax;
    ref.v = [m, v0, c, h, y_resolution](double x, double t) {
        return hopf_lax_reference(m, v0, c, x, t, y_resolution, h).value;
    };
    ref.u = [m, v0, c, h, y_resolution](double x, double t) {
        return hopf_lax_reference(m, v0, c, x, t, y_resolution, h).u;
    };
    return ref;
}

// Fine-mesh reference: run the scheme itself on a grid at least `factor`
// times finer (same lambda) and expose its reconstructions.
inline ReferenceSolution make_fine_mesh_reference(const FluxModel& m, double c,
                                                  const std::function<double(double)>& u0,
                                                  int n_ref, int k_ref, double t_max,
                                                  double h = 0.0,
                                                  const std::function<double(double)>& v0 = {}) {
    SchemeConfig cfg;
    cfg.model = m;
    cfg.c = c;
    cfg.h = h;
    const StaggeredGrid g(n_ref, k_ref);
    const int steps = static_cast<int>(std::lround(t_max / g.dt()));
    const double anchor = v0 ? v0(wrap_unit(-g.dx())) : 0.0;
    auto u_traj = std::make_shared<Trajectory>(solve(cfg, discretize_u0(g, u0), steps, 1));
    auto v_traj = std::make_shared<Trajectory>(solve(cfg, discretize_v0(g, u0, anchor), steps, 1));

    ReferenceSolution ref;
    ref.tag = ReferenceSolution::Tag::FineMesh;
    ref.dx_ref = g.dx();
    ref.u = [u_traj](double x, double t) { return u_traj->eval_u(x, t); };
    ref.v = [v_traj](double x, double t) { return v_traj->eval_v(x, t); };
    ref.u_field_at = [u_traj](double t) { return u_traj->at_step(u_traj->step_index(t)); };
    return ref;
}

// ---------------------------------------------------------------------------
// Error norms.
// ---------------------------------------------------------------------------

// Exact L1 distance between two step reconstructions: sweep the merged cell
// boundaries and integrate the piecewise-constant difference.
inline double l1_between_step_functions(const GridField& a, const GridField& b) {
    std::vector<double> cuts;
    auto add_cuts = [&cuts](const GridField& f) {
        const double dx = f.grid.dx();
        for (int i = 0; i < f.grid.N; ++i) {
            cuts.push_back(wrap_unit((f.col_of(i) - 1) * dx));
            cuts.push_back(wrap_unit((f.col_of(i) + 1) * dx));
        }
    };
    add_cuts(a);
    add_cuts(b);
    cuts.push_back(0.0);
    cuts.push_back(1.0);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double width = cuts[i + 1] - cuts[i];
        if (width <= 0.0) continue;
        const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
        total += width * std::abs(eval_u_field(a, mid) - eval_u_field(b, mid));
    }
    return total;
}

struct ErrorReport {
    double l1 = std::numeric_limits<double>::quiet_NaN();
    double c0 = std::numeric_limits<double>::quiet_NaN();
};

// L1 of u against the reference by cellwise quadrature (exact cell sweep when
// the reference is itself a step function), sup of u or v by dense sampling
// with at least `samples_per_cell` points per cell.
inline ErrorReport error_report(const Trajectory& traj, const ReferenceSolution& ref, double t,
                                bool want_l1 = true, bool want_c0 = true,
                                int samples_per_cell = 8) {
    const GridField& f = traj.at_step(traj.step_index(t));
    const StaggeredGrid& g = f.grid;
    ErrorReport rep;
    samples_per_cell = std::max(samples_per_cell, 8);

    if (want_l1) {
        if (f.parity != Parity::Even) throw NumericError("error_report: L1 norm applies to u runs");
        if (ref.u_field_at) {
            rep.l1 = l1_between_step_functions(f, ref.u_field_at(t));
        } else {
            if (!ref.u) throw NumericError("error_report: reference has no u evaluator");
            double total = 0.0;
            const int per_cell = 2 * samples_per_cell;
            const double cell_w = 2.0 * g.dx();
            for (int i = 0; i < g.N; ++i) {
                const double left = f.x_of(i) - g.dx();
                double acc = 0.0;
                for (int s = 0; s < per_cell; ++s) {
                    const double x = left + cell_w * (s + 0.5) / per_cell;
                    acc += std::abs(f.vals[static_cast<std::size_t>(i)] - ref.u(wrap_unit(x), t));
                }
                total += acc * cell_w / per_cell;
            }
            rep.l1 = total;
        }
    }

    if (want_c0) {
        const int n_samples = samples_per_cell * g.N;
        double worst = 0.0;
        for (int s = 0; s < n_samples; ++s) {
            const double x = (s + 0.5) / n_samples;
            double diff;
            if (f.parity == Parity::Odd) {
                if (!ref.v) throw NumericError("error_report: reference has no v evaluator");
                diff = eval_v_field(f, x) - ref.v(x, t);
            } else {
                if (!ref.u) throw NumericError("error_report: reference has no u evaluator");
                diff = eval_u_field(f, x) - ref.u(x, t);
            }
            worst = std::max(worst, std::abs(diff));
        }
        rep.c0 = worst;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Convergence studies.
// ---------------------------------------------------------------------------

struct OrderFit {
    std::vector<double> dx;
    std::vector<double> err;
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // rms of the log-log fit
    bool exact_zero = false;  // all errors at rounding level; slope meaningless
};

inline OrderFit fit_order(const std::vector<double>& dx, const std::vector<double>& err) {
    if (dx.size() != err.size() || dx.size() < 3)
        throw NumericError("fit_order: need at least 3 meshes");
    OrderFit fit;
    fit.dx = dx;
    fit.err = err;
    bool zero = true;
    for (double e : err) zero = zero && e <= 1e-13;
    if (zero) {
        fit.exact_zero = true;
        fit.slope = std::numeric_limits<double>::quiet_NaN();
        return fit;
    }
    const std::size_t n = dx.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(dx[i]);
        const double ly = std::log(std::max(err[i], 1e-300));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double pred = fit.intercept + fit.slope * std::log(dx[i]);
        const double d = std::log(std::max(err[i], 1e-300)) - pred;
        rss += d * d;
    }
    fit.residual = std::sqrt(rss / n);
    return fit;
}

enum class StudyNorm { VSup, UL1, USup };

struct StudyProblem {
    FluxModel model;
    double c = 0.0;
    std::function<double(double)> u0;
    std::function<double(double)> v0;  // exact primitive of u0 (for Hopf-Lax refs)
    double t_eval = 0.5;
};

struct StudyResult {
    std::vector<int> mesh_n;
    OrderFit fit;
    bool monotone = true;
};

// Errors across a nested mesh family at fixed lambda, with reference either
// Hopf-Lax (x,t-independent models) or a run at `fine_factor` times the
// finest mesh.
inline StudyResult convergence_study(const StudyProblem& prob, const std::vector<StaggeredGrid>& meshes,
                                     StudyNorm norm, bool use_hopf_lax, int fine_factor = 4,
                                     int threads = 1) {
    if (meshes.size() < 3) throw NumericError("convergence_study: need at least 3 meshes");
    const double lam = meshes.front().lambda();
    for (const auto& g : meshes)
        if (std::abs(g.lambda() - lam) > 1e-12)
            throw NumericError("convergence_study: meshes must share lambda");

    ReferenceSolution ref;
    if (use_hopf_lax) {
        if (!prob.v0) throw NumericError("convergence_study: Hopf-Lax reference needs v0");
        ref = make_hopf_lax_reference(prob.model, prob.v0, prob.c);
    } else {
        int n_max = 0;
        for (const auto& g : meshes) n_max = std::max(n_max, g.N);
        const int n_ref = n_max * fine_factor;
        const int k_ref = static_cast<int>(std::lround(n_ref / lam));
        ref = make_fine_mesh_reference(prob.model, prob.c, prob.u0, n_ref, k_ref, prob.t_eval);
    }

    StudyResult res;
    std::vector<double> dxs(meshes.size()), errs(meshes.size());
    parallel_for(meshes.size(), threads, [&](std::size_t i) {
        const StaggeredGrid& g = meshes[i];
        SchemeConfig cfg;
        cfg.model = prob.model;
        cfg.c = prob.c;
        const int steps = static_cast<int>(std::lround(prob.t_eval / g.dt()));
        ErrorReport rep;
        if (norm == StudyNorm::VSup) {
            // pin the discrete primitive to the exact one at x = -dx
            const double anchor = prob.v0 ? prob.v0(wrap_unit(-g.dx())) : 0.0;
            const Trajectory traj = solve(cfg, discretize_v0(g, prob.u0, anchor), steps, steps);
            rep = error_report(traj, ref, prob.t_eval, false, true, 8);
        } else {
            const Trajectory traj = solve(cfg, discretize_u0(g, prob.u0), steps, steps);
            rep = error_report(traj, ref, prob.t_eval, norm == StudyNorm::UL1,
                               norm == StudyNorm::USup, 8);
        }
        dxs[i] = g.dx();
        errs[i] = (norm == StudyNorm::UL1) ? rep.l1 : rep.c0;
    });
    for (std::size_t i = 0; i < meshes.size(); ++i) res.mesh_n.push_back(meshes[i].N);
    for (std::size_t i = 1; i < errs.size(); ++i)
        if (errs[i] >= errs[i - 1]) res.monotone = false;
    res.fit = fit_order(dxs, errs);
    return res;
}

// ---------------------------------------------------------------------------
// Time-global stability run with the barrier and decay envelopes.
// ---------------------------------------------------------------------------

struct StabilityReport {
    int n_periods = 0;
    std::vector<double> max_u_at_period;      // |u| at integer times, t = 0..n
    std::vector<double> margin_min_per_period;
    std::vector<double> E_series;             // per step
    EntropyConditionCheck conditions;
    double barrier = 0.0;                     // beta1(1) + 1
    double margin_initial = 0.0;              // margin of the initial data
    double margin_reference = 0.0;            // floor within the first period
    bool barrier_ok = false;
    bool margin_ok = false;                   // later periods never fall below half the
                                              // first period's floor (no degradation)
    bool envelope_first_period_ok = false;    // E^k <= 2 e^{eta t_k} / (Hpp* t_k), k = 1..2K
    bool envelope_late_ok = false;            // E^k <= 4 e eta / Hpp* for k > k(1/eta)
};

inline StabilityReport stability_longrun(const FluxModel& model, const StaggeredGrid& g, double c,
                                         const GridField& u0, int n_periods,
                                         const AprioriConstants& ap) {
    if (n_periods < 1) throw NumericError("stability_longrun: n_periods must be >= 1");
    SchemeConfig cfg;
    cfg.model = model;
    cfg.c = c;

    StabilityReport rep;
    rep.n_periods = n_periods;
    rep.conditions = check_entropy_conditions(model, g, ap);
    rep.barrier = ap.beta1() + 1.0;
    rep.margin_initial = cfl_margin(u0, cfg);

    GridField u = u0;
    rep.max_u_at_period.push_back(u.max_abs());
    rep.E_series.push_back(one_sided_max(u));
    const int steps = g.steps_per_period();
    for (int p = 0; p < n_periods; ++p) {
        double margin_floor = std::numeric_limits<double>::infinity();
        for (int s = 0; s < steps; ++s) {
            u = step_u(u, cfg);
            margin_floor = std::min(margin_floor, cfl_margin(u, cfg));
            rep.E_series.push_back(one_sided_max(u));
        }
        u.k = 0;
        rep.max_u_at_period.push_back(u.max_abs());
        rep.margin_min_per_period.push_back(margin_floor);
    }

    rep.barrier_ok = true;
    for (std::size_t p = 1; p < rep.max_u_at_period.size(); ++p)
        rep.barrier_ok = rep.barrier_ok && (rep.max_u_at_period[p] <= rep.barrier);
    // the first period absorbs the transient toward the (possibly marginal)
    // attractor; afterwards the margin must not degrade
    rep.margin_reference = rep.margin_min_per_period.front();
    rep.margin_ok = true;
    for (double m : rep.margin_min_per_period)
        rep.margin_ok = rep.margin_ok && (m >= 0.5 * rep.margin_reference);

    // decay envelopes guaranteed only when the step-size conditions hold
    const double dt = g.dt();
    bool early = true;
    for (int k = 1; k <= steps && k < static_cast<int>(rep.E_series.size()); ++k) {
        const double tk = k * dt;
        early = early && (rep.E_series[static_cast<std::size_t>(k)] <=
                          2.0 * std::exp(ap.eta * tk) / (ap.H_pp_star * tk) + 1e-12);
    }
    rep.envelope_first_period_ok = early;
    const int k_eta = static_cast<int>(std::floor(1.0 / (ap.eta * dt)));
    bool late = true;
    for (std::size_t k = static_cast<std::size_t>(k_eta + 1); k < rep.E_series.size(); ++k)
        late = late && (rep.E_series[k] <= 4.0 * M_E * ap.eta / ap.H_pp_star + 1e-12);
    rep.envelope_late_ok = late;
    return rep;
}

// ---------------------------------------------------------------------------
// Characteristic curves and rotation numbers.
// ---------------------------------------------------------------------------

struct CharacteristicCurve {
    std::vector<double> s;  // parameter samples
    std::vector<double> x;  // unrolled positions
    double step = 0.0;
};

// u evaluator of a periodic state, extended periodically in both variables.
inline std::function<double(double, double)> periodic_u_evaluator(const PeriodicState& st) {
    auto period = std::make_shared<std::vector<GridField>>(st.period);
    const StaggeredGrid g = st.grid;
    return [period, g](double x, double t) {
        const double tm = wrap_unit(t);
        int k = static_cast<int>(std::floor(tm / g.dt()));
        k = std::min(k, g.steps_per_period() - 1);
        return eval_u_field((*period)[static_cast<std::size_t>(k)], wrap_unit(x));
    };
}

// Classical RK4 for x'(s) = Hp(x, s, c + u(x,s)) on the unrolled line; s1 may
// be smaller than s0 (backward characteristics).
inline CharacteristicCurve characteristic_ode(const FluxModel& model, double c,
                                              const std::function<double(double, double)>& u_eval,
                                              double x0, double s0, double s1, double step) {
    if (!(step > 0.0)) throw NumericError("characteristic_ode: step must be positive");
    const double span = s1 - s0;
    const int n = std::max(1, static_cast<int>(std::ceil(std::abs(span) / step)));
    const double h = span / n;
    if (std::abs(h) < 1e-15) throw NumericError("characteristic_ode: step underflow");
    auto f = [&](double x, double s) { return model.hp(wrap_unit(x), wrap_unit(s), c + u_eval(x, s)); };

    CharacteristicCurve curve;
    curve.step = h;
    curve.s.reserve(static_cast<std::size_t>(n + 1));
    curve.x.reserve(static_cast<std::size_t>(n + 1));
    double x = x0, s = s0;
    curve.s.push_back(s);
    curve.x.push_back(x);
    for (int i = 0; i < n; ++i) {
        const double k1 = f(x, s);
        const double k2 = f(x + 0.5 * h * k1, s + 0.5 * h);
        const double k3 = f(x + 0.5 * h * k2, s + 0.5 * h);
        const double k4 = f(x + h * k3, s + h);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        s = s0 + (i + 1) * h;
        curve.s.push_back(s);
        curve.x.push_back(x);
    }
    return curve;
}

struct RotationNumber {
    double omega = 0.0;
    double halfwidth = 0.0;  // spread of subwindow slopes
};

inline RotationNumber rotation_number(const CharacteristicCurve& curve, int subwindows = 4) {
    if (curve.s.size() < 8) throw NumericError("rotation_number: curve too short");
    const double span = curve.s.back() - curve.s.front();
    RotationNumber rn;
    rn.omega = (curve.x.back() - curve.x.front()) / span;
    const std::size_t n = curve.s.size() - 1;
    for (int w = 0; w < subwindows; ++w) {
        const std::size_t a = n * w / subwindows;
        const std::size_t b = n * (w + 1) / subwindows;
        const double slope = (curve.x[b] - curve.x[a]) / (curve.s[b] - curve.s[a]);
        rn.halfwidth = std::max(rn.halfwidth, std::abs(slope - rn.omega));
    }
    return rn;
}

// ---------------------------------------------------------------------------
// Self-convergence of periodic states against the finest mesh, the empirical
// stand-in for torus error rates whose conjugacy data is unavailable.
// ---------------------------------------------------------------------------

struct KamReport {
    std::vector<int> mesh_n;
    std::vector<double> dx;
    std::vector<double> u_err;  // sup over a dense space-time lattice
    std::vector<double> v_err;  // same, after removing the free constant
    OrderFit u_fit, v_fit;
    std::vector<std::string> errors;
    bool all_ok = true;
};

inline KamReport kam_self_convergence(const FluxModel& model, double c,
                                      const std::vector<StaggeredGrid>& meshes, double tol,
                                      int max_periods, int threads = 1) {
    if (meshes.size() < 4)
        throw NumericError("kam_self_convergence: need at least 3 meshes plus the finest");
    KamReport rep;
    const std::size_t n_meshes = meshes.size();
    std::vector<PeriodicState> states(n_meshes);
    rep.errors.assign(n_meshes, std::string());
    parallel_for(n_meshes, threads, [&](std::size_t i) {
        try {
            states[i] = find_periodic_u(model, meshes[i], c, tol, max_periods);
            effective_hamiltonian(states[i], model);
        } catch (const std::exception& e) {
            rep.errors[i] = e.what();
        }
    });
    for (const auto& e : rep.errors) rep.all_ok = rep.all_ok && e.empty();
    if (!rep.all_ok) return rep;

    // v snapshots: step the periodic v with h = h_bar through one period
    auto v_snapshots = [&](const PeriodicState& st) {
        SchemeConfig cfg;
        cfg.model = model;
        cfg.c = c;
        cfg.h = st.h_bar;
        std::vector<GridField> snaps;
        GridField v = v_from_u(st.u0bar);
        snaps.push_back(v);
        for (int s = 0; s < st.grid.steps_per_period(); ++s) {
            v = step_v(v, cfg);
            snaps.push_back(v);
        }
        return snaps;
    };

    const PeriodicState& fin = states.back();
    const auto fin_v = v_snapshots(fin);
    const int nx = 4 * fin.grid.N;
    const int nt = 32;

    auto eval_u_at = [&](const PeriodicState& st, double x, double t) {
        int k = static_cast<int>(std::floor(wrap_unit(t) / st.grid.dt()));
        k = std::min(k, st.grid.steps_per_period() - 1);
        return eval_u_field(st.period[static_cast<std::size_t>(k)], x);
    };
    auto eval_v_at = [&](const std::vector<GridField>& snaps, const StaggeredGrid& g, double x,
                         double t) {
        int k = static_cast<int>(std::floor(wrap_unit(t) / g.dt()));
        k = std::min(k, g.steps_per_period() - 1);
        return eval_v_field(snaps[static_cast<std::size_t>(k)], x);
    };

    for (std::size_t i = 0; i + 1 < n_meshes; ++i) {
        const auto v_i = v_snapshots(states[i]);
        // remove the free additive constant of each v before comparing
        double mean_i = 0.0, mean_f = 0.0;
        int count = 0;
        for (int it = 0; it < nt; ++it)
            for (int ix = 0; ix < nx; ++ix) {
                const double x = (ix + 0.5) / nx;
                const double t = (it + 0.5) / nt;
                mean_i += eval_v_at(v_i, states[i].grid, x, t);
                mean_f += eval_v_at(fin_v, fin.grid, x, t);
                ++count;
            }
        mean_i /= count;
        mean_f /= count;

        double ue = 0.0, ve = 0.0;
        for (int it = 0; it < nt; ++it)
            for (int ix = 0; ix < nx; ++ix) {
                const double x = (ix + 0.5) / nx;
                const double t = (it + 0.5) / nt;
                ue = std::max(ue, std::abs(eval_u_at(states[i], x, t) - eval_u_at(fin, x, t)));
                ve = std::max(ve, std::abs((eval_v_at(v_i, states[i].grid, x, t) - mean_i) -
                                           (eval_v_at(fin_v, fin.grid, x, t) - mean_f)));
            }
        rep.mesh_n.push_back(meshes[i].N);
        rep.dx.push_back(meshes[i].dx());
        rep.u_err.push_back(ue);
        rep.v_err.push_back(ve);
    }
    rep.u_fit = fit_order(rep.dx, rep.u_err);
    rep.v_fit = fit_order(rep.dx, rep.v_err);
    return rep;
}

}  // namespace staglf
