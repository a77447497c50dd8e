#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <limits>
#include <unordered_map>
#include <utility>
#include <vector>

#include "staglf/scheme.hpp"

namespace staglf {

// ---------------------------------------------------------------------------
// Backward random walks on the odd grid. A cone hangs from an apex node
// (x_n, t_{l+1}); walks step -dt in time and +-dx in space, so level k holds
// the columns within (l+1-k) dx of the apex. Columns are kept unwrapped
// (walks live on the line, field lookups wrap).
// ---------------------------------------------------------------------------

struct WalkCone {
    StaggeredGrid grid;
    long apex_col = 1;
    int depth = 1;  // apex sits at time level `depth` (= l+1 >= 1)

    WalkCone() = default;
    WalkCone(const StaggeredGrid& g, long n, int levels) : grid(g), apex_col(n), depth(levels) {
        if (levels < 1) throw NumericError("WalkCone: depth must be >= 1");
        if (((n + levels) & 1) == 0) throw NumericError("WalkCone: apex must be an odd-grid node");
    }

    int width(int k) const { return depth - k + 1; }           // columns at level k
    long col(int k, int j) const { return apex_col - (depth - k) + 2 * j; }
    double x(int k, int j) const { return grid.x_of(col(k, j)); }
    double t(int k) const { return grid.t_of(k); }
    double apex_time() const { return grid.t_of(depth); }
};

// Control xi on the cone, one value per node of levels 1..depth, clamped to
// [-1/lambda, 1/lambda].
struct VelocityField {
    WalkCone cone;
    std::vector<std::vector<double>> xi;  // xi[k-1][j] for level k
    int clamp_events = 0;

    explicit VelocityField(const WalkCone& c) : cone(c), xi(static_cast<std::size_t>(c.depth)) {
        for (int k = 1; k <= c.depth; ++k)
            xi[static_cast<std::size_t>(k - 1)].assign(static_cast<std::size_t>(c.width(k)), 0.0);
    }

    double at(int k, int j) const { return xi[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(j)]; }

    void set(int k, int j, double value) {
        const double cap = 1.0 / cone.grid.lambda();
        double v = value;
        if (v > cap) { v = cap; ++clamp_events; }
        if (v < -cap) { v = -cap; ++clamp_events; }
        xi[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(j)] = v;
    }
};

// Transition probabilities induced by a control: from (x_m, t_k) the walk
// moves to x_m - dx with probability 1/2 + (lambda/2) xi and to x_m + dx with
// the complement.
struct WalkDistribution {
    const VelocityField* field;

    explicit WalkDistribution(const VelocityField& f) : field(&f) {}

    double rho_left(int k, int j) const {
        return 0.5 + 0.5 * field->cone.grid.lambda() * field->at(k, j);
    }
    double rho_right(int k, int j) const {
        return 0.5 - 0.5 * field->cone.grid.lambda() * field->at(k, j);
    }

    // P(walk at level k sits at column j), by forward propagation from the apex.
    std::vector<std::vector<double>> occupations() const {
        const WalkCone& c = field->cone;
        std::vector<std::vector<double>> occ(static_cast<std::size_t>(c.depth + 1));
        occ[static_cast<std::size_t>(c.depth)] = {1.0};
        for (int k = c.depth; k >= 1; --k) {
            auto& cur = occ[static_cast<std::size_t>(k)];
            auto& nxt = occ[static_cast<std::size_t>(k - 1)];
            nxt.assign(static_cast<std::size_t>(c.width(k - 1)), 0.0);
            for (int j = 0; j < c.width(k); ++j) {
                nxt[static_cast<std::size_t>(j)] += cur[static_cast<std::size_t>(j)] * rho_left(k, j);
                nxt[static_cast<std::size_t>(j + 1)] += cur[static_cast<std::size_t>(j)] * rho_right(k, j);
            }
        }
        return occ;
    }
};

// xi*^{k}_m = Hp(x_m, t_{k-1}, c + D_x v^{k-1}_{m+1}) on the cone; the clamp
// must not bind while the CFL margin is positive.
inline VelocityField minimizing_velocity_field(const Trajectory& v_traj, const SchemeConfig& cfg,
                                               const WalkCone& cone) {
    VelocityField out(cone);
    const double inv2dx = 1.0 / (2.0 * cone.grid.dx());
    for (int k = 1; k <= cone.depth; ++k) {
        const GridField& v = v_traj.at_step(k - 1);
        for (int j = 0; j < cone.width(k); ++j) {
            const long m = cone.col(k, j);
            const double slope = (v.at_col(m + 1) - v.at_col(m - 1)) * inv2dx;
            out.set(k, j, cfg.model.hp(wrap_unit(cone.x(k, j)), cone.t(k - 1), cfg.c + slope));
        }
    }
    return out;
}

namespace detail {

// Backward value recursion over a cone: terminal at level 0, per-node
// additive term at levels 1..depth, children averaged with the transition
// weights.
inline double cone_expectation(const VelocityField& xi,
                               const std::function<double(int, int, double)>& node_term,
                               const std::function<double(long)>& terminal) {
    const WalkCone& c = xi.cone;
    const WalkDistribution dist(xi);
    std::vector<double> w(static_cast<std::size_t>(c.width(0)));
    for (int j = 0; j < c.width(0); ++j) w[static_cast<std::size_t>(j)] = terminal(c.col(0, j));
    std::vector<double> next;
    for (int k = 1; k <= c.depth; ++k) {
        next.assign(static_cast<std::size_t>(c.width(k)), 0.0);
        for (int j = 0; j < c.width(k); ++j) {
            const double cont = dist.rho_left(k, j) * w[static_cast<std::size_t>(j)] +
                                dist.rho_right(k, j) * w[static_cast<std::size_t>(j + 1)];
            next[static_cast<std::size_t>(j)] = node_term(k, j, xi.at(k, j)) + cont;
        }
        w.swap(next);
    }
    return w[0];
}

}  // namespace detail

inline std::function<double(long)> terminal_from_field(const GridField& f) {
    return [f](long col) { return f.at_col(col); };
}

// Expected action of a control: E[ sum L^{(c)}(gamma^k, t_{k-1}, xi^k) dt
// + v0(gamma^0) ] + h t_{l+1}, evaluated exactly by the value recursion.
inline double expected_action(const VelocityField& xi, const std::function<double(long)>& v0,
                              const SchemeConfig& cfg) {
    const WalkCone& c = xi.cone;
    const double dt = c.grid.dt();
    auto node = [&](int k, int j, double x_i) {
        return lagrangian_shifted(cfg.model, wrap_unit(c.x(k, j)), c.t(k - 1), x_i, cfg.c) * dt;
    };
    return detail::cone_expectation(xi, node, v0) + cfg.h * c.apex_time();
}

inline double expected_action(const VelocityField& xi, const GridField& v0,
                              const SchemeConfig& cfg) {
    return expected_action(xi, terminal_from_field(v0), cfg);
}

// ---------------------------------------------------------------------------
// Brute-force infimum over discretized controls. The value recursion
// minimizes node-by-node (each node's control enters only its own level term
// and transition weights), so the exact minimum over the xi-grid is a
// per-node 1-D search.
// ---------------------------------------------------------------------------

struct BruteForceResult {
    double value = 0.0;
    double gap_estimate = 0.0;  // |value - value at a doubled xi-grid|
    int xi_levels = 0;
};

namespace detail {

inline double brute_force_pass(const WalkCone& c, const std::function<double(long)>& terminal,
                               const SchemeConfig& cfg, int levels) {
    const double cap = 1.0 / c.grid.lambda();
    const double lam = c.grid.lambda();
    const double dt = c.grid.dt();
    std::vector<double> grid_xi(static_cast<std::size_t>(levels));
    for (int i = 0; i < levels; ++i)
        grid_xi[static_cast<std::size_t>(i)] = -cap + 2.0 * cap * i / (levels - 1.0);

    std::vector<double> w(static_cast<std::size_t>(c.width(0)));
    for (int j = 0; j < c.width(0); ++j) w[static_cast<std::size_t>(j)] = terminal(c.col(0, j));
    std::vector<double> next;
    for (int k = 1; k <= c.depth; ++k) {
        next.assign(static_cast<std::size_t>(c.width(k)), 0.0);
        for (int j = 0; j < c.width(k); ++j) {
            const double x = wrap_unit(c.x(k, j));
            const double tkm1 = c.t(k - 1);
            const double wl = w[static_cast<std::size_t>(j)];
            const double wr = w[static_cast<std::size_t>(j + 1)];
            double best = std::numeric_limits<double>::infinity();
            for (double x_i : grid_xi) {
                const double rho = 0.5 + 0.5 * lam * x_i;
                const double cand = lagrangian_shifted(cfg.model, x, tkm1, x_i, cfg.c) * dt +
                                    rho * wl + (1.0 - rho) * wr;
                best = std::min(best, cand);
            }
            next[static_cast<std::size_t>(j)] = best;
        }
        w.swap(next);
    }
    return w[0] + cfg.h * c.apex_time();
}

}  // namespace detail

inline BruteForceResult brute_force_value(const WalkCone& cone,
                                          const std::function<double(long)>& terminal,
                                          const SchemeConfig& cfg, int xi_levels) {
    if (cone.depth > 24) throw NumericError("brute_force_value: cone too deep");
    if (xi_levels < 3) throw NumericError("brute_force_value: need at least 3 xi levels");
    BruteForceResult r;
    r.xi_levels = xi_levels;
    r.value = detail::brute_force_pass(cone, terminal, cfg, xi_levels);
    const double refined = detail::brute_force_pass(cone, terminal, cfg, 2 * (xi_levels - 1) + 1);
    r.gap_estimate = std::abs(r.value - refined);
    return r;
}

inline BruteForceResult brute_force_value(const WalkCone& cone, const GridField& v0,
                                          const SchemeConfig& cfg, int xi_levels) {
    return brute_force_value(cone, terminal_from_field(v0), cfg, xi_levels);
}

// ---------------------------------------------------------------------------
// Path sampling under mu(.;xi) with a counter-based generator: one uniform
// per (seed, sample, level), reproducible for any thread layout.
// ---------------------------------------------------------------------------

struct PathSample {
    std::uint64_t index = 0;
    std::vector<long> cols;   // gamma^k as column index, k = 0..depth
    std::vector<double> eta;  // companion drift path
};

struct PathEnsemble {
    std::vector<PathSample> samples;
    std::vector<double> mean_path;  // E[x(gamma^k)] estimate per level
    std::vector<double> d_tilde;    // E|gamma - eta| estimate per level
    std::vector<double> sigma_tilde;
    std::vector<double> d_stderr;
    std::vector<double> sigma_stderr;
};

inline PathEnsemble sample_paths(const VelocityField& xi, int n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw NumericError("sample_paths: n_samples must be >= 1");
    const WalkCone& c = xi.cone;
    const WalkDistribution dist(xi);
    const double dt = c.grid.dt();
    const int L = c.depth;

    PathEnsemble ens;
    ens.samples.resize(static_cast<std::size_t>(n_samples));
    std::vector<double> sx(static_cast<std::size_t>(L + 1), 0.0);
    std::vector<double> sd(static_cast<std::size_t>(L + 1), 0.0), sd2(static_cast<std::size_t>(L + 1), 0.0);
    std::vector<double> ss(static_cast<std::size_t>(L + 1), 0.0), ss2(static_cast<std::size_t>(L + 1), 0.0);

    for (int s = 0; s < n_samples; ++s) {
        PathSample& path = ens.samples[static_cast<std::size_t>(s)];
        path.index = static_cast<std::uint64_t>(s);
        path.cols.assign(static_cast<std::size_t>(L + 1), 0);
        path.eta.assign(static_cast<std::size_t>(L + 1), 0.0);
        long col = c.apex_col;
        double drift = 0.0;
        path.cols[static_cast<std::size_t>(L)] = col;
        path.eta[static_cast<std::size_t>(L)] = c.grid.x_of(c.apex_col);
        for (int k = L; k >= 1; --k) {
            const int j = static_cast<int>((col - c.col(k, 0)) / 2);
            const double u = counter_uniform(seed, static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(k));
            drift += xi.at(k, j) * dt;
            col += (u < dist.rho_left(k, j)) ? -1 : +1;
            path.cols[static_cast<std::size_t>(k - 1)] = col;
            path.eta[static_cast<std::size_t>(k - 1)] = c.grid.x_of(c.apex_col) - drift;
        }
        for (int k = 0; k <= L; ++k) {
            const double x = c.grid.x_of(path.cols[static_cast<std::size_t>(k)]);
            const double dev = std::abs(x - path.eta[static_cast<std::size_t>(k)]);
            sx[static_cast<std::size_t>(k)] += x;
            sd[static_cast<std::size_t>(k)] += dev;
            sd2[static_cast<std::size_t>(k)] += dev * dev;
            ss[static_cast<std::size_t>(k)] += dev * dev;
            ss2[static_cast<std::size_t>(k)] += dev * dev * dev * dev;
        }
    }

    const double n = static_cast<double>(n_samples);
    ens.mean_path.resize(static_cast<std::size_t>(L + 1));
    ens.d_tilde.resize(static_cast<std::size_t>(L + 1));
    ens.sigma_tilde.resize(static_cast<std::size_t>(L + 1));
    ens.d_stderr.resize(static_cast<std::size_t>(L + 1));
    ens.sigma_stderr.resize(static_cast<std::size_t>(L + 1));
    for (int k = 0; k <= L; ++k) {
        const std::size_t i = static_cast<std::size_t>(k);
        ens.mean_path[i] = sx[i] / n;
        ens.d_tilde[i] = sd[i] / n;
        ens.sigma_tilde[i] = ss[i] / n;
        const double var_d = std::max(0.0, sd2[i] / n - ens.d_tilde[i] * ens.d_tilde[i]);
        const double var_s = std::max(0.0, ss2[i] / n - ens.sigma_tilde[i] * ens.sigma_tilde[i]);
        ens.d_stderr[i] = std::sqrt(var_d / n);
        ens.sigma_stderr[i] = std::sqrt(var_s / n);
    }
    return ens;
}

// Exact E[x(gamma^k)] per level from the occupation probabilities.
inline std::vector<double> exact_mean_path(const VelocityField& xi) {
    const WalkCone& c = xi.cone;
    const auto occ = WalkDistribution(xi).occupations();
    std::vector<double> mean(static_cast<std::size_t>(c.depth + 1), 0.0);
    for (int k = 0; k <= c.depth; ++k) {
        double m = 0.0;
        for (int j = 0; j < c.width(k); ++j)
            m += occ[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] * c.x(k, j);
        mean[static_cast<std::size_t>(k)] = m;
    }
    return mean;
}

// ---------------------------------------------------------------------------
// Deviation of walks from their drift companion eta: d^k = E|gamma^k - eta^k|
// and sigma^k = E|gamma^k - eta^k|^2. Computed exactly by propagating the
// joint distribution of (column, accumulated drift); if that state space
// outgrows the budget, falls back to Monte Carlo with standard errors.
// ---------------------------------------------------------------------------

struct EtaDeviation {
    std::vector<double> d_tilde;
    std::vector<double> sigma_tilde;
    bool exact = true;
    std::vector<double> d_stderr;      // zero when exact
    std::vector<double> sigma_stderr;
    std::vector<double> bound;         // (t_{l+1} - t_k) dx / lambda per level
};

inline EtaDeviation eta_deviation(const VelocityField& xi, std::size_t state_budget = (1u << 21),
                                  int mc_samples = 200000, std::uint64_t mc_seed = 20240501) {
    const WalkCone& c = xi.cone;
    const int L = c.depth;
    const double dt = c.grid.dt();
    const double dx = c.grid.dx();
    EtaDeviation out;
    out.d_tilde.assign(static_cast<std::size_t>(L + 1), 0.0);
    out.sigma_tilde.assign(static_cast<std::size_t>(L + 1), 0.0);
    out.bound.resize(static_cast<std::size_t>(L + 1));
    for (int k = 0; k <= L; ++k)
        out.bound[static_cast<std::size_t>(k)] = (c.apex_time() - c.t(k)) * dx / c.grid.lambda();

    const WalkDistribution dist(xi);
    struct KeyHash {
        std::size_t operator()(const std::pair<int, std::uint64_t>& p) const {
            return static_cast<std::size_t>(mix64(static_cast<std::uint64_t>(p.first) * 0x100000001b3ULL ^ p.second));
        }
    };
    using Level = std::unordered_map<std::pair<int, std::uint64_t>, double, KeyHash>;

    auto pack = [](double d) {
        std::uint64_t b;
        static_assert(sizeof(b) == sizeof(d));
        std::memcpy(&b, &d, sizeof(b));
        return b;
    };
    auto unpack = [](std::uint64_t b) {
        double d;
        std::memcpy(&d, &b, sizeof(d));
        return d;
    };

    Level cur;
    cur[{0, pack(0.0)}] = 1.0;  // at the apex: j = 0, drift sum 0
    bool feasible = true;
    // deviation at level k is |x(col) - x(apex) + drift|
    auto record = [&](int k, const Level& level) {
        double d1 = 0.0, d2 = 0.0;
        for (const auto& [key, p] : level) {
            const double dev = std::abs(c.x(k, key.first) - c.grid.x_of(c.apex_col) + unpack(key.second));
            d1 += p * dev;
            d2 += p * dev * dev;
        }
        out.d_tilde[static_cast<std::size_t>(k)] = d1;
        out.sigma_tilde[static_cast<std::size_t>(k)] = d2;
    };
    record(L, cur);
    for (int k = L; k >= 1 && feasible; --k) {
        Level next;
        next.reserve(2 * cur.size());
        for (const auto& [key, p] : cur) {
            const int j = key.first;
            const double drift = unpack(key.second) + xi.at(k, j) * dt;
            const std::uint64_t db = pack(drift);
            next[{j, db}] += p * dist.rho_left(k, j);
            next[{j + 1, db}] += p * dist.rho_right(k, j);
        }
        if (next.size() > state_budget) {
            feasible = false;
            break;
        }
        cur.swap(next);
        record(k - 1, cur);
    }
    if (feasible) {
        out.exact = true;
        out.d_stderr.assign(static_cast<std::size_t>(L + 1), 0.0);
        out.sigma_stderr.assign(static_cast<std::size_t>(L + 1), 0.0);
        return out;
    }

    // Monte Carlo fallback.
    const PathEnsemble ens = sample_paths(xi, mc_samples, mc_seed);
    out.exact = false;
    out.d_tilde = ens.d_tilde;
    out.sigma_tilde = ens.sigma_tilde;
    out.d_stderr = ens.d_stderr;
    out.sigma_stderr = ens.sigma_stderr;
    return out;
}

// ---------------------------------------------------------------------------
// Entropy sandwich around u^{l+1}_{n+1}: expectations of the x-derivative of
// the shifted Lagrangian along the minimizing walks for v^{l+1}_n and
// v^{l+1}_{n+2}, with the initial data read one column to the right (upper)
// or left (lower).
// ---------------------------------------------------------------------------

struct EntropySandwich {
    double lower = 0.0;
    double upper = 0.0;
    double u_value = 0.0;
};

inline EntropySandwich entropy_sandwich(const Trajectory& u_traj, const Trajectory& v_traj,
                                        const SchemeConfig& cfg, long n, int depth) {
    const StaggeredGrid& g = u_traj.initial().grid;
    const double dt = g.dt();
    const GridField& u0 = u_traj.at_step(0);

    auto lx_term = [&](const WalkCone& c) {
        return [&cfg, c, dt](int k, int j, double x_i) {
            return lagrangian_xderiv(cfg.model, wrap_unit(c.x(k, j)), c.t(k - 1), x_i) * dt;
        };
    };

    EntropySandwich s;
    {
        const WalkCone cone(g, n, depth);
        const VelocityField xi = minimizing_velocity_field(v_traj, cfg, cone);
        s.upper = detail::cone_expectation(xi, lx_term(cone),
                                           [&](long col) { return u0.at_col(col + 1); });
    }
    {
        const WalkCone cone(g, n + 2, depth);
        const VelocityField xi = minimizing_velocity_field(v_traj, cfg, cone);
        s.lower = detail::cone_expectation(xi, lx_term(cone),
                                           [&](long col) { return u0.at_col(col - 1); });
    }
    s.u_value = u_traj.at_step(depth).at_col(n + 1);
    return s;
}

}  // namespace staglf
