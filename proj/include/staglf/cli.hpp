#pragma once

#include <cmath>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "staglf/config.hpp"
#include "staglf/io.hpp"

namespace staglf::cli {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;   // usage / config errors
constexpr int kExitNumeric = 2;  // CFL or tolerance aborts
constexpr int kExitAssert = 3;   // verification command found a violation

struct InitialData {
    std::string id;
    std::function<double(double)> u0;
    std::function<double(double)> v0;  // exact primitive (zero-mean data)
};

// 1-periodic triangle wave with range [-1,1] and zero mean, plus its
// primitive with T(0) = 0.
inline double triangle_wave(double s) {
    const double r = s - std::floor(s);
    if (r < 0.25) return 4.0 * r;
    if (r < 0.75) return 2.0 - 4.0 * r;
    return 4.0 * r - 4.0;
}

inline double triangle_primitive(double s) {
    const double w = std::floor(s);
    const double r = s - w;
    if (r < 0.25) return 2.0 * r * r;
    if (r < 0.75) return 2.0 * r - 2.0 * r * r - 0.25;
    return 2.0 * (r - 1.0) * (r - 1.0);
}

inline InitialData initial_from_config(const RunConfig& cfg) {
    InitialData data;
    data.id = cfg.get_str("initial", "id", "sine");
    const double a = cfg.get_double("initial", "amplitude", 0.2);
    if (data.id == "zero") {
        data.u0 = [](double) { return 0.0; };
        data.v0 = [](double) { return 0.0; };
    } else if (data.id == "sine") {
        const int f = static_cast<int>(cfg.get_int("initial", "frequency", 1));
        if (f < 1) throw ConfigError("[initial] frequency must be >= 1");
        const double w = 2.0 * M_PI * f;
        data.u0 = [a, w](double x) { return a * std::sin(w * x); };
        data.v0 = [a, w](double x) { return -a / w * std::cos(w * x); };
    } else if (data.id == "sawtooth") {
        const int q = static_cast<int>(cfg.get_int("initial", "cycles", 4));
        if (q < 1) throw ConfigError("[initial] cycles must be >= 1");
        data.u0 = [a, q](double x) { return a * triangle_wave(q * x); };
        data.v0 = [a, q](double x) { return a / q * triangle_primitive(q * x); };
    } else {
        throw ConfigError("[initial] unknown id: " + data.id);
    }
    return data;
}

inline FluxModel model_from_config(const RunConfig& cfg) {
    const std::string id = cfg.get_str("model", "id", "quadratic");
    const double a = cfg.get_double("model", "amplitude", 0.25);
    try {
        return make_model(id, a);
    } catch (const NumericError& e) {
        throw ConfigError(e.what());
    }
}

inline StaggeredGrid grid_from_config(const RunConfig& cfg) {
    const int n = static_cast<int>(cfg.get_int("grid", "N", 32));
    const int k = static_cast<int>(cfg.get_int("grid", "K", n));
    try {
        return StaggeredGrid(n, k);
    } catch (const NumericError& e) {
        throw ConfigError(e.what());
    }
}

inline SchemeConfig scheme_from_config(const RunConfig& cfg) {
    SchemeConfig sc;
    sc.model = model_from_config(cfg);
    sc.c = cfg.get_double("scheme", "c", 0.0);
    sc.h = cfg.get_double("scheme", "h", 0.0);
    sc.cfl_abort = cfg.get_bool("scheme", "cfl_abort", true);
    return sc;
}

inline fs::path out_dir(const RunConfig& cfg) {
    const std::string out = cfg.get_str("run", "out", "");
    if (out.empty()) throw ConfigError("missing required config field [run] out");
    return fs::path(out);
}

inline int threads_of(const RunConfig& cfg) {
    return static_cast<int>(cfg.get_int("run", "threads", 1));
}

inline void write_echo(const RunConfig& cfg, const fs::path& dir) {
    write_text_file(dir / "config_echo.txt", cfg.serialize());
}

// ---------------------------------------------------------------------------

inline int cmd_solve(const RunConfig& cfg, std::ostream& log) {
    const fs::path dir = out_dir(cfg);
    const SchemeConfig sc = scheme_from_config(cfg);
    const StaggeredGrid g = grid_from_config(cfg);

    const std::string variable = cfg.get_str("solve", "variable", "u");
    int steps;
    if (cfg.has("solve", "steps")) {
        steps = static_cast<int>(cfg.get_int("solve", "steps", 0));
    } else {
        const double t_end = cfg.get_double("solve", "t_end", 1.0);
        steps = static_cast<int>(std::lround(t_end / g.dt()));
    }
    if (steps < 0) throw ConfigError("[solve] steps must be >= 0");
    const int record_every = static_cast<int>(cfg.get_int("solve", "record_every", 1));

    if (variable != "u" && variable != "v") throw ConfigError("[solve] variable must be u or v");
    GridField f0;
    if (cfg.get_str("initial", "id", "sine") == "file") {
        // resume from a binary dump; the stored time index carries over
        const std::string path = cfg.require_str("initial", "path");
        f0 = read_field_binary(path);
        if (!(f0.grid == g))
            throw ConfigError("[initial] dump grid does not match [grid]: " + path);
        if (f0.parity != (variable == "v" ? Parity::Odd : Parity::Even))
            throw ConfigError("[initial] dump parity does not match [solve] variable");
    } else {
        const InitialData init = initial_from_config(cfg);
        f0 = (variable == "v")
                 ? discretize_v0(g, init.u0, init.v0 ? init.v0(wrap_unit(-g.dx())) : 0.0)
                 : discretize_u0(g, init.u0);
    }

    const Trajectory traj = solve(sc, f0, steps, record_every);
    write_trajectory(dir, traj, variable);
    write_field_binary(dir / (variable + "_final.sgf"), traj.snapshots.back());

    double margin_min = std::numeric_limits<double>::infinity();
    for (const auto& d : traj.diag) margin_min = std::min(margin_min, d.cfl_margin);
    json summary = {{"command", "solve"},
                    {"variable", variable},
                    {"steps", steps},
                    {"snapshots", traj.snapshots.size()},
                    {"final_mean", traj.diag.back().mean},
                    {"final_max_abs", traj.diag.back().max_abs},
                    {"cfl_margin_min", margin_min}};
    write_text_file(dir / "summary.json", summary.dump(2) + "\n");
    write_echo(cfg, dir);
    log << "solve: " << steps << " steps, " << traj.snapshots.size()
        << " snapshots, min CFL margin " << margin_min << "\n";
    return kExitOk;
}

inline int cmd_periodic(const RunConfig& cfg, std::ostream& log) {
    const fs::path dir = out_dir(cfg);
    const FluxModel model = model_from_config(cfg);
    const StaggeredGrid g = grid_from_config(cfg);
    const double c = cfg.get_double("scheme", "c", cfg.get_double("periodic", "c", 0.0));
    const double tol = cfg.get_double("periodic", "tol", 1e-10);
    const int max_periods = static_cast<int>(cfg.get_int("periodic", "max_periods", 20000));
    const bool cfl_abort = cfg.get_bool("scheme", "cfl_abort", true);

    PeriodicState st = find_periodic_u(model, g, c, tol, max_periods, std::nullopt, cfl_abort);
    effective_hamiltonian(st, model,
                          static_cast<int>(cfg.get_int("periodic", "drift_periods", 8)), cfl_abort);
    periodic_v(st, model, 50.0, cfl_abort);

    write_field_csv(dir / "u0bar.csv", st.u0bar);
    write_field_csv(dir / "v0bar.csv", st.v0bar);
    write_field_binary(dir / "u0bar.sgf", st.u0bar);
    for (const auto& f : st.period) write_field_csv(dir / snapshot_name("period", f.k), f);

    const bool gap_ok = st.method_gap <= 10.0 * tol;
    const bool mean_ok = std::abs(st.u0bar.mean()) <= 1e-12;
    json summary = {{"command", "periodic"},
                    {"c", c},
                    {"h_bar", st.h_bar},
                    {"h_bar_drift", st.h_bar_drift},
                    {"method_gap", st.method_gap},
                    {"periods_used", st.periods_used},
                    {"rho", st.rho},
                    {"final_residual", st.final_residual},
                    {"v_residual", st.v_residual},
                    {"b_const", st.b_const},
                    {"assertions",
                     {{"methods_agree", gap_ok}, {"zero_mean", mean_ok}}}};
    write_text_file(dir / "summary.json", summary.dump(2) + "\n");
    write_echo(cfg, dir);
    log << "periodic: c=" << c << " h_bar=" << st.h_bar << " gap=" << st.method_gap
        << " periods=" << st.periods_used << "\n";
    return (gap_ok && mean_ok) ? kExitOk : kExitAssert;
}

inline int cmd_sweep(const RunConfig& cfg, std::ostream& log) {
    const fs::path dir = out_dir(cfg);
    const FluxModel model = model_from_config(cfg);
    const StaggeredGrid g = grid_from_config(cfg);
    const double tol = cfg.get_double("sweep", "tol", 1e-9);
    const int max_periods = static_cast<int>(cfg.get_int("sweep", "max_periods", 20000));
    const bool cfl_abort = cfg.get_bool("scheme", "cfl_abort", true);

    std::vector<double> cs = cfg.get_double_list("sweep", "c_list", {});
    if (cs.empty()) {
        const double c0 = cfg.get_double("sweep", "c_min", -1.0);
        const double c1 = cfg.get_double("sweep", "c_max", 1.0);
        const int count = static_cast<int>(cfg.get_int("sweep", "count", 21));
        if (count < 3) throw ConfigError("[sweep] count must be >= 3");
        for (int i = 0; i < count; ++i) cs.push_back(c0 + (c1 - c0) * i / (count - 1.0));
    }

    const EffectiveCurve curve = sweep(model, g, cs, tol, max_periods, threads_of(cfg), cfl_abort);
    write_sweep_csv(dir / "sweep.csv", curve);

    const bool convex_ok = curve.min_second_diff >= -1e-8;
    json per_c = json::array();
    for (std::size_t i = 0; i < cs.size(); ++i)
        per_c.push_back({{"c", cs[i]},
                         {"h_bar", curve.h_bar[i]},
                         {"gap", curve.method_gap[i]},
                         {"error", curve.errors[i]}});
    json summary = {{"command", "sweep"},
                    {"min_second_diff", curve.min_second_diff},
                    {"assertions", {{"convex", convex_ok}, {"all_runs_ok", curve.all_ok()}}},
                    {"points", per_c}};
    write_text_file(dir / "summary.json", summary.dump(2) + "\n");
    write_echo(cfg, dir);
    log << "sweep: " << cs.size() << " points, min second difference " << curve.min_second_diff
        << "\n";
    if (!curve.all_ok()) return kExitNumeric;
    return convex_ok ? kExitOk : kExitAssert;
}

inline int cmd_converge(const RunConfig& cfg, std::ostream& log) {
    const fs::path dir = out_dir(cfg);
    StudyProblem prob;
    prob.model = model_from_config(cfg);
    prob.c = cfg.get_double("scheme", "c", 0.0);
    const InitialData init = initial_from_config(cfg);
    prob.u0 = init.u0;
    prob.v0 = init.v0;
    prob.t_eval = cfg.get_double("converge", "t_eval", 0.5);

    const std::string norm_s = cfg.get_str("converge", "norm", "v_sup");
    StudyNorm norm;
    if (norm_s == "v_sup") norm = StudyNorm::VSup;
    else if (norm_s == "u_l1") norm = StudyNorm::UL1;
    else if (norm_s == "u_sup") norm = StudyNorm::USup;
    else throw ConfigError("[converge] norm must be v_sup, u_l1 or u_sup");

    const auto mesh_ns = cfg.get_int_list("converge", "meshes", {16, 32, 64, 128});
    const int k_over_n = static_cast<int>(cfg.get_int("converge", "K_over_N", 1));
    std::vector<StaggeredGrid> meshes;
    for (long long n : mesh_ns) meshes.emplace_back(static_cast<int>(n), static_cast<int>(n) * k_over_n);

    const std::string ref = cfg.get_str("converge", "reference", "hopflax");
    const bool hopflax = ref == "hopflax";
    if (!hopflax && ref != "finemesh")
        throw ConfigError("[converge] reference must be hopflax or finemesh");
    const int fine_factor = static_cast<int>(cfg.get_int("converge", "fine_factor", 4));
    const double min_order = cfg.get_double("converge", "min_order", 0.25);

    const StudyResult res =
        convergence_study(prob, meshes, norm, hopflax, fine_factor, threads_of(cfg));
    write_study_csv(dir / "study.csv", res);
    const bool pass = !res.fit.exact_zero && res.fit.slope >= min_order;
    json summary = {{"command", "converge"},
                    {"norm", norm_s},
                    {"slope", res.fit.exact_zero ? json() : json(res.fit.slope)},
                    {"residual", res.fit.residual},
                    {"monotone", res.monotone},
                    {"exact_zero", res.fit.exact_zero},
                    {"min_order", min_order},
                    {"assertions", {{"order_met", pass || res.fit.exact_zero}}}};
    write_text_file(dir / "summary.json", summary.dump(2) + "\n");
    write_echo(cfg, dir);
    log << "converge[" << norm_s << "]: slope "
        << (res.fit.exact_zero ? std::string("exact") : fmt_double(res.fit.slope)) << " over "
        << meshes.size() << " meshes\n";
    return (pass || res.fit.exact_zero) ? kExitOk : kExitAssert;
}

inline int cmd_walk(const RunConfig& cfg, std::ostream& log) {
    const fs::path dir = out_dir(cfg);
    const SchemeConfig sc = scheme_from_config(cfg);
    const StaggeredGrid g = grid_from_config(cfg);
    const InitialData init = initial_from_config(cfg);

    int depth;
    long apex;
    if (cfg.has("walk", "depth")) {
        depth = static_cast<int>(cfg.get_int("walk", "depth", 8));
        apex = cfg.get_int("walk", "apex", 1);
    } else {
        const double t = cfg.get_double("walk", "t", 0.5);
        const double x = cfg.get_double("walk", "x", 0.5);
        depth = std::max(1, static_cast<int>(std::lround(t / g.dt())));
        apex = static_cast<long>(std::lround(x / g.dx()));
        if (((apex + depth) & 1) == 0) ++apex;
    }
    if (((apex + depth) & 1) == 0)
        throw ConfigError("[walk] apex+depth must be odd (an odd-grid node)");

    const GridField u0 = discretize_u0(g, init.u0);
    const GridField v0 = v_from_u(u0);
    const Trajectory ut = solve(sc, u0, depth, 1);
    const Trajectory vt = solve(sc, v0, depth, 1);
    const WalkCone cone(g, apex, depth);
    const VelocityField xi = minimizing_velocity_field(vt, sc, cone);

    const double action = expected_action(xi, vt.at_step(0), sc);
    const double scheme_value = vt.at_step(depth).at_col(apex);
    const double identity_gap = std::abs(action - scheme_value);
    const double identity_tol = cfg.get_double("walk", "identity_tol", 1e-9);

    const auto budget =
        static_cast<std::size_t>(std::max(1LL, cfg.get_int("walk", "state_budget", 1 << 21)));
    const auto seed = static_cast<std::uint64_t>(cfg.get_int("run", "seed", 1));
    const EtaDeviation dev =
        eta_deviation(xi, budget, static_cast<int>(cfg.get_int("walk", "mc_samples", 200000)), seed);

    bool sigma_ok = true;
    json levels = json::array();
    for (int k = 0; k <= depth; ++k) {
        sigma_ok = sigma_ok && dev.sigma_tilde[static_cast<std::size_t>(k)] <=
                                   dev.bound[static_cast<std::size_t>(k)] + 1e-12;
        levels.push_back({{"k", k},
                          {"t", g.t_of(k)},
                          {"d", dev.d_tilde[static_cast<std::size_t>(k)]},
                          {"sigma", dev.sigma_tilde[static_cast<std::size_t>(k)]},
                          {"bound", dev.bound[static_cast<std::size_t>(k)]}});
    }

    const int n_samples = static_cast<int>(cfg.get_int("walk", "n_samples", 0));
    if (n_samples > 0) {
        const PathEnsemble ens = sample_paths(xi, n_samples, seed);
        write_paths_csv(dir / "paths.csv", ens, g);
    }

    json summary = {{"command", "walk"},
                    {"apex", apex},
                    {"depth", depth},
                    {"expected_action", action},
                    {"scheme_value", scheme_value},
                    {"identity_gap", identity_gap},
                    {"deviation_exact", dev.exact},
                    {"clamp_events", xi.clamp_events},
                    {"levels", levels},
                    {"assertions",
                     {{"action_matches_scheme", identity_gap <= identity_tol},
                      {"variance_bound", sigma_ok}}}};
    write_text_file(dir / "deviation.json", summary.dump(2) + "\n");
    write_text_file(dir / "summary.json", summary.dump(2) + "\n");
    write_echo(cfg, dir);
    log << "walk: apex " << apex << " depth " << depth << " identity gap " << identity_gap << "\n";
    return (identity_gap <= identity_tol && sigma_ok) ? kExitOk : kExitAssert;
}

inline int cmd_stability(const RunConfig& cfg, std::ostream& log) {
    const fs::path dir = out_dir(cfg);
    const FluxModel model = model_from_config(cfg);
    const StaggeredGrid g = grid_from_config(cfg);
    const InitialData init = initial_from_config(cfg);
    const double c = cfg.get_double("scheme", "c", 0.0);
    const int n_periods = static_cast<int>(cfg.get_int("stability", "n_periods", 100));
    const double lambda1 = cfg.get_double("stability", "lambda1", 1.0 / g.lambda() * 0.999);
    const double r = cfg.get_double("stability", "r", 1.0);
    const double inflation = cfg.get_double("stability", "inflation", 1.1);

    const AprioriConstants ap = apriori_constants(
        model, 1.0, lambda1, std::min(c, 0.0), std::max(c, 0.0), r,
        static_cast<int>(cfg.get_int("stability", "density", 48)), inflation);
    const GridField u0 = discretize_u0(g, init.u0);
    const StabilityReport rep = stability_longrun(model, g, c, u0, n_periods, ap);

    json summary = {{"command", "stability"},
                    {"n_periods", n_periods},
                    {"beta1", ap.beta1()},
                    {"barrier", rep.barrier},
                    {"eta", ap.eta},
                    {"E_star", ap.E_star},
                    {"margin_initial", rep.margin_initial},
                    {"margin_reference", rep.margin_reference},
                    {"max_u_final", rep.max_u_at_period.back()},
                    {"conditions",
                     {{"cfl_tightened", rep.conditions.cfl_tightened},
                      {"lambda_vs_r", rep.conditions.lambda_vs_r},
                      {"dt_small", rep.conditions.dt_small}}},
                    {"assertions",
                     {{"barrier", rep.barrier_ok},
                      {"margin", rep.margin_ok},
                      {"envelope_first_period", !rep.conditions.all() || rep.envelope_first_period_ok},
                      {"envelope_late", !rep.conditions.all() || rep.envelope_late_ok}}}};
    write_text_file(dir / "summary.json", summary.dump(2) + "\n");
    write_echo(cfg, dir);
    log << "stability: " << n_periods << " periods, barrier " << rep.barrier << ", max|u| "
        << rep.max_u_at_period.back() << "\n";
    const bool pass = rep.barrier_ok && rep.margin_ok &&
                      (!rep.conditions.all() ||
                       (rep.envelope_first_period_ok && rep.envelope_late_ok));
    return pass ? kExitOk : kExitAssert;
}

// Dispatch by name; maps exceptions onto the documented exit codes.
inline int run_command(const std::string& name, RunConfig cfg, std::ostream& log = std::cout) {
    cfg.set("run", "command", name);
    try {
        if (name == "solve") return cmd_solve(cfg, log);
        if (name == "periodic") return cmd_periodic(cfg, log);
        if (name == "sweep") return cmd_sweep(cfg, log);
        if (name == "converge") return cmd_converge(cfg, log);
        if (name == "walk") return cmd_walk(cfg, log);
        if (name == "stability") return cmd_stability(cfg, log);
        log << "unknown command: " << name << "\n";
        return kExitConfig;
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const CflViolation& e) {
        log << "numerical abort: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const NumericError& e) {
        log << "numerical abort: " << e.what() << "\n";
        return kExitNumeric;
    }
}

}  // namespace staglf::cli
