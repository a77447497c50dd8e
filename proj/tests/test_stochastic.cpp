#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "staglf/stochastic.hpp"

using namespace staglf;
using Catch::Approx;

namespace {

const auto sine02 = [](double x) { return 0.2 * std::sin(2.0 * M_PI * x); };

SchemeConfig burgers(double c = 0.0, double h = 0.0) {
    SchemeConfig cfg;
    cfg.model = make_quadratic();
    cfg.c = c;
    cfg.h = h;
    return cfg;
}

struct Run {
    StaggeredGrid g;
    SchemeConfig cfg;
    Trajectory u_traj;
    Trajectory v_traj;
};

Run burgers_run(int n, int steps, double c = 0.0) {
    Run r{StaggeredGrid(n, n), burgers(c), {}, {}};
    const GridField u0 = discretize_u0(r.g, sine02);
    const GridField v0 = v_from_u(u0);
    r.u_traj = solve(r.cfg, u0, steps, 1);
    r.v_traj = solve(r.cfg, v0, steps, 1);
    return r;
}

}  // namespace

TEST_CASE("cone geometry") {
    const StaggeredGrid g(8, 8);
    const WalkCone c(g, 3, 4);  // 3 + 4 odd
    CHECK(c.width(4) == 1);
    CHECK(c.width(0) == 5);
    CHECK(c.col(4, 0) == 3);
    CHECK(c.col(0, 0) == -1);
    CHECK(c.col(0, 4) == 7);
    CHECK_THROWS_AS(WalkCone(g, 2, 4), NumericError);  // even node
    CHECK_THROWS_AS(WalkCone(g, 3, 0), NumericError);
}

TEST_CASE("minimizing velocity field for flat states equals the shift velocity") {
    const StaggeredGrid g(8, 16);
    const SchemeConfig cfg = burgers(0.7);
    GridField v0(g, Parity::Odd, 0);
    const Trajectory vt = solve(cfg, v0, 8, 1);
    const WalkCone cone(g, 1, 8);
    const VelocityField xi = minimizing_velocity_field(vt, cfg, cone);
    for (int k = 1; k <= cone.depth; ++k)
        for (int j = 0; j < cone.width(k); ++j)
            CHECK(xi.at(k, j) == Approx(0.7).margin(1e-13));
    CHECK(xi.clamp_events == 0);

    const VelocityField xi0 = minimizing_velocity_field(solve(burgers(), v0, 8, 1), burgers(), cone);
    for (int k = 1; k <= cone.depth; ++k)
        for (int j = 0; j < cone.width(k); ++j)
            CHECK(xi0.at(k, j) == 0.0);
}

TEST_CASE("positive CFL margin implies no clamping") {
    const Run r = burgers_run(16, 24);
    for (const auto& d : r.v_traj.diag) REQUIRE(d.cfl_margin > 0.0);
    const WalkCone cone(r.g, 5, 24);
    const VelocityField xi = minimizing_velocity_field(r.v_traj, r.cfg, cone);
    CHECK(xi.clamp_events == 0);
}

TEST_CASE("transition probabilities and occupations are a distribution") {
    const Run r = burgers_run(16, 20);
    const WalkCone cone(r.g, 7, 20);
    const VelocityField xi = minimizing_velocity_field(r.v_traj, r.cfg, cone);
    const WalkDistribution dist(xi);
    for (int k = 1; k <= cone.depth; ++k)
        for (int j = 0; j < cone.width(k); ++j) {
            const double l = dist.rho_left(k, j), rr = dist.rho_right(k, j);
            REQUIRE(l >= 0.0);
            REQUIRE(rr >= 0.0);
            REQUIRE(l + rr == Approx(1.0).margin(1e-15));
        }
    const auto occ = dist.occupations();
    for (int k = 0; k <= cone.depth; ++k) {
        double s = 0.0;
        for (double p : occ[k]) s += p;
        REQUIRE(s == Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("expected_action: one-step formula") {
    const StaggeredGrid g(8, 8);
    const SchemeConfig cfg = burgers(0.3, 0.1);
    const WalkCone cone(g, 4, 1);  // apex at level 1 sits on an even column
    VelocityField xi(cone);        // xi^1 = 0
    const double a = 0.37, b = -0.21;  // v0 at columns 3 and 5
    auto v0 = [&](long col) { return col == 3 ? a : b; };
    const double dt = g.dt();
    const double expect = 0.5 * (a + b) +
                          lagrangian_shifted(cfg.model, g.x_of(4), 0.0, 0.0, cfg.c) * dt +
                          cfg.h * dt;
    CHECK(expected_action(xi, v0, cfg) == Approx(expect).margin(1e-15));
}

TEST_CASE("expected_action with xi* reproduces the scheme at every depth") {
    const Run r = burgers_run(16, 32);
    for (int trial = 0; trial < 25; ++trial) {
        const int depth = 1 + static_cast<int>(counter_uniform(21, 0, trial) * 31.9);
        long n = static_cast<long>(counter_uniform(21, 1, trial) * 31.9);
        if (((n + depth) & 1) == 0) ++n;
        const WalkCone cone(r.g, n, depth);
        const VelocityField xi = minimizing_velocity_field(r.v_traj, r.cfg, cone);
        const double act = expected_action(xi, r.v_traj.at_step(0), r.cfg);
        const double v = r.v_traj.at_step(depth).at_col(n);
        REQUIRE(act == Approx(v).margin(1e-10));
    }
}

TEST_CASE("value representation identity across flux classes") {
    // x-dependent, t-dependent and nonquadratic fluxes with nonzero shift and
    // right-hand constant; any mis-indexed (x, t) argument would break this
    struct Case {
        FluxModel m;
        double c, h;
    };
    const Case cases[] = {{make_mechanical(0.25), 0.3, 0.2},
                          {make_timedep(0.2), 0.4, -0.1},
                          {make_quartic(0.1), 0.2, 0.0}};
    for (const auto& cs : cases) {
        const StaggeredGrid g(16, 32);
        SchemeConfig cfg;
        cfg.model = cs.m;
        cfg.c = cs.c;
        cfg.h = cs.h;
        const Trajectory vt = solve(cfg, discretize_v0(g, sine02), 2 * g.K, 1);
        for (int trial = 0; trial < 20; ++trial) {
            const int depth = 1 + (trial * 3) % (2 * g.K - 1);
            long n = (7 * trial + 1) % (2 * g.N);
            if (((n + depth) & 1) == 0) ++n;
            const WalkCone cone(g, n, depth);
            const VelocityField xi = minimizing_velocity_field(vt, cfg, cone);
            const double act = expected_action(xi, vt.at_step(0), cfg);
            REQUIRE(std::abs(act - vt.at_step(depth).at_col(n)) <= 1e-12);
        }
    }
}

TEST_CASE("perturbing the minimizing field never lowers the action") {
    const Run r = burgers_run(16, 16);
    const WalkCone cone(r.g, 9, 16);
    const VelocityField best = minimizing_velocity_field(r.v_traj, r.cfg, cone);
    const GridField& v0 = r.v_traj.at_step(0);
    const double base = expected_action(best, v0, r.cfg);
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 1 + static_cast<int>(counter_uniform(33, 0, trial) * (cone.depth - 0.1));
        const int j = static_cast<int>(counter_uniform(33, 1, trial) * (cone.width(k) - 0.1));
        const double delta = (counter_uniform(33, 2, trial) - 0.5) * 0.4;
        VelocityField perturbed = best;
        perturbed.set(k, j, best.at(k, j) + delta);
        REQUIRE(expected_action(perturbed, v0, r.cfg) >= base - 1e-12);
    }
}

TEST_CASE("brute force: flat terminal gives zero at the symmetric control") {
    const StaggeredGrid g(8, 8);
    const WalkCone cone(g, 2, 1);
    const BruteForceResult bf = brute_force_value(cone, [](long) { return 0.0; }, burgers(), 11);
    CHECK(bf.value == Approx(0.0).margin(1e-15));
}

TEST_CASE("brute force approaches the scheme value quadratically in the xi-grid") {
    // aggregate over all depth-4 apexes so the distance-to-grid luck of
    // individual node minimizers averages out
    const Run r = burgers_run(16, 8);
    const int depth = 4;
    std::vector<double> total(3, 0.0);
    const int level_list[3] = {11, 41, 161};
    for (long n = 1; n < 2 * r.g.N; ++n) {
        if (((n + depth) & 1) == 0) continue;
        const WalkCone cone(r.g, n, depth);
        const VelocityField xi = minimizing_velocity_field(r.v_traj, r.cfg, cone);
        const double exact = expected_action(xi, r.v_traj.at_step(0), r.cfg);
        for (int i = 0; i < 3; ++i) {
            const BruteForceResult bf =
                brute_force_value(cone, r.v_traj.at_step(0), r.cfg, level_list[i]);
            const double gap = bf.value - exact;
            REQUIRE(gap >= -1e-12);  // discretized controls cannot beat the infimum
            total[i] += gap;
        }
    }
    INFO("total gaps: " << total[0] << " " << total[1] << " " << total[2]);
    // spacing shrinks 4x per refinement; a quadratic trend gains ~16x
    CHECK(total[1] <= total[0] / 8.0);
    CHECK(total[2] <= total[1] / 8.0);
}

TEST_CASE("brute force on linear terminal data matches the 1-D minimization oracle") {
    const StaggeredGrid g(8, 8);
    const SchemeConfig cfg = burgers(0.4, 0.05);
    const double s = 0.3;
    const WalkCone cone(g, 5, 4);
    auto terminal = [&](long col) { return s * g.x_of(col); };
    const int levels = 41;
    const BruteForceResult bf = brute_force_value(cone, terminal, cfg, levels);

    // oracle: optimal control is constant; per-step cost is the grid minimum
    // of L^{(c)}(xi) - s xi, and the continuous minimum is -H(c+s).
    const double cap = 1.0 / g.lambda();
    double grid_min = std::numeric_limits<double>::infinity();
    for (int i = 0; i < levels; ++i) {
        const double xi = -cap + 2.0 * cap * i / (levels - 1.0);
        grid_min = std::min(grid_min,
                            lagrangian_shifted(cfg.model, 0.0, 0.0, xi, cfg.c) - s * xi);
    }
    const double t = cone.apex_time();
    CHECK(bf.value == Approx(terminal(cone.apex_col) + t * grid_min + cfg.h * t).margin(1e-13));
    const double continuous = terminal(cone.apex_col) - t * cfg.model.h(0, 0, cfg.c + s) + cfg.h * t;
    CHECK(std::abs(bf.value - continuous) <= 1e-3);
}

TEST_CASE("sampling is deterministic in the seed") {
    const Run r = burgers_run(16, 12);
    const WalkCone cone(r.g, 5, 12);
    const VelocityField xi = minimizing_velocity_field(r.v_traj, r.cfg, cone);
    const PathEnsemble a = sample_paths(xi, 64, 99);
    const PathEnsemble b = sample_paths(xi, 64, 99);
    const PathEnsemble c = sample_paths(xi, 64, 100);
    REQUIRE(a.samples.size() == b.samples.size());
    bool all_same = true, any_diff = false;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        if (a.samples[i].cols != b.samples[i].cols) all_same = false;
        if (a.samples[i].cols != c.samples[i].cols) any_diff = true;
    }
    CHECK(all_same);
    CHECK(any_diff);
}

TEST_CASE("sample paths: steps are +-dx and the apex is fixed") {
    const Run r = burgers_run(16, 10);
    const WalkCone cone(r.g, 5, 10);
    const VelocityField xi = minimizing_velocity_field(r.v_traj, r.cfg, cone);
    const PathEnsemble ens = sample_paths(xi, 32, 7);
    for (const auto& p : ens.samples) {
        REQUIRE(p.cols.back() == cone.apex_col);
        for (std::size_t k = 1; k < p.cols.size(); ++k)
            REQUIRE(std::abs(p.cols[k] - p.cols[k - 1]) == 1);
    }
}

TEST_CASE("constant drift: sampled mean matches apex - v t") {
    const StaggeredGrid g(16, 16);
    const WalkCone cone(g, 9, 16);
    VelocityField xi(cone);
    const double v = 0.55;
    for (int k = 1; k <= cone.depth; ++k)
        for (int j = 0; j < cone.width(k); ++j) xi.set(k, j, v);
    const int n = 10000;
    const PathEnsemble ens = sample_paths(xi, n, 2024);
    const double t = cone.apex_time();
    const double tol = 3.0 * std::sqrt(t * g.dx() / g.lambda() / n) + 1e-12;
    CHECK(std::abs(ens.mean_path.front() - (g.x_of(cone.apex_col) - v * t)) <= tol);
}

TEST_CASE("monte carlo mean path converges to the exact mean path") {
    const Run r = burgers_run(16, 14);
    const WalkCone cone(r.g, 7, 14);
    const VelocityField xi = minimizing_velocity_field(r.v_traj, r.cfg, cone);
    const std::vector<double> exact = exact_mean_path(xi);
    for (int n : {400, 6400}) {
        const PathEnsemble ens = sample_paths(xi, n, 5);
        for (int k = 0; k <= cone.depth; ++k) {
            const double sd = std::sqrt((cone.apex_time() - cone.t(k)) * r.g.dx() / r.g.lambda());
            REQUIRE(std::abs(ens.mean_path[k] - exact[k]) <= 3.0 * sd / std::sqrt(double(n)) + 1e-12);
        }
    }
}

TEST_CASE("eta deviation: symmetric walk saturates the variance bound") {
    const StaggeredGrid g(16, 16);
    const WalkCone cone(g, 9, 16);
    const VelocityField xi(cone);  // zero control
    const EtaDeviation dev = eta_deviation(xi);
    REQUIRE(dev.exact);
    for (int k = 0; k <= cone.depth; ++k) {
        CHECK(std::abs(dev.sigma_tilde[k] - dev.bound[k]) <= 1e-12);
        CHECK(dev.d_tilde[k] * dev.d_tilde[k] <= dev.sigma_tilde[k] + 1e-15);
    }
}

TEST_CASE("eta deviation for a minimizing field: bounds hold, strict inside") {
    const Run r = burgers_run(16, 12);
    const WalkCone cone(r.g, 5, 12);
    const VelocityField xi = minimizing_velocity_field(r.v_traj, r.cfg, cone);
    const EtaDeviation dev = eta_deviation(xi);
    REQUIRE(dev.exact);
    for (int k = 0; k <= cone.depth; ++k) {
        CHECK(dev.sigma_tilde[k] <= dev.bound[k] + 1e-12);
        CHECK(dev.d_tilde[k] * dev.d_tilde[k] <= dev.sigma_tilde[k] + 1e-15);
    }
    CHECK(dev.sigma_tilde[0] < dev.bound[0]);  // nonzero control bites
}

TEST_CASE("joint-DP second moment agrees with the occupation-sum identity") {
    // independent route: sigma^k = sum_{k'>k} sum_j occ^{k'}_j (dx^2 - xi^2 dt^2),
    // from the martingale increments of gamma - eta
    const Run r = burgers_run(16, 12);
    const WalkCone cone(r.g, 5, 12);
    const VelocityField xi = minimizing_velocity_field(r.v_traj, r.cfg, cone);
    const EtaDeviation dev = eta_deviation(xi);
    REQUIRE(dev.exact);
    const auto occ = WalkDistribution(xi).occupations();
    const double dx = r.g.dx(), dt = r.g.dt();
    for (int k = 0; k <= cone.depth; ++k) {
        double sigma = 0.0;
        for (int kp = k + 1; kp <= cone.depth; ++kp)
            for (int j = 0; j < cone.width(kp); ++j)
                sigma += occ[kp][j] * (dx * dx - xi.at(kp, j) * xi.at(kp, j) * dt * dt);
        CHECK(dev.sigma_tilde[k] == Approx(sigma).margin(1e-13));
    }
}

TEST_CASE("eta deviation falls back to monte carlo under a tiny budget") {
    const Run r = burgers_run(16, 10);
    const WalkCone cone(r.g, 5, 10);
    const VelocityField xi = minimizing_velocity_field(r.v_traj, r.cfg, cone);
    const EtaDeviation exact = eta_deviation(xi);
    const EtaDeviation mc = eta_deviation(xi, /*state_budget=*/4, /*mc_samples=*/40000, 17);
    REQUIRE(exact.exact);
    REQUIRE_FALSE(mc.exact);
    for (int k = 0; k <= cone.depth; ++k) {
        CHECK(std::abs(mc.d_tilde[k] - exact.d_tilde[k]) <= 5.0 * mc.d_stderr[k] + 1e-9);
        CHECK(std::abs(mc.sigma_tilde[k] - exact.sigma_tilde[k]) <= 5.0 * mc.sigma_stderr[k] + 1e-9);
    }
}

TEST_CASE("entropy sandwich: trivial data collapses to zero") {
    const StaggeredGrid g(8, 8);
    const SchemeConfig cfg = burgers();
    GridField u0(g, Parity::Even, 0);
    const Trajectory ut = solve(cfg, u0, 8, 1);
    const Trajectory vt = solve(cfg, v_from_u(u0), 8, 1);
    const EntropySandwich s = entropy_sandwich(ut, vt, cfg, 3, 8);
    CHECK(s.lower == Approx(0.0).margin(1e-14));
    CHECK(s.upper == Approx(0.0).margin(1e-14));
    CHECK(s.u_value == Approx(0.0).margin(1e-14));
}

TEST_CASE("entropy sandwich brackets the scheme with mesh-independent slack") {
    auto theta_needed = [](int n) {
        const Run r = burgers_run(n, n / 2);  // t = 1/4
        const int depth = n / 2;
        double theta = 0.0;
        for (long nn = 1; nn < 2 * n; nn += 2) {
            const EntropySandwich s = entropy_sandwich(r.u_traj, r.v_traj, r.cfg, nn, depth);
            theta = std::max(theta, (s.lower - s.u_value) / r.g.dx());
            theta = std::max(theta, (s.u_value - s.upper) / r.g.dx());
        }
        return theta;
    };
    const double t16 = theta_needed(16);
    const double t32 = theta_needed(32);
    const double t64 = theta_needed(64);
    INFO("theta by mesh: " << t16 << " " << t32 << " " << t64);
    // the slack constant must not grow as the mesh refines; in this smooth
    // regime the measured slack is zero, so a small fixed cap pins it
    CHECK(t64 <= std::max({t16, t32, 0.05}) * 3.0);
    CHECK(t16 <= 0.05);
    CHECK(t32 <= 0.05);
    CHECK(t64 <= 0.05);
}

TEST_CASE("entropy sandwich for an x-dependent flux needs only O(dx) slack") {
    // here the slack is genuinely nonzero (the x-derivative sums bite) but
    // stays mesh-independent; measured ~1.4 on this family
    auto theta_needed = [](int n) {
        const StaggeredGrid g(n, n);
        SchemeConfig cfg;
        cfg.model = make_mechanical(0.25);
        const GridField u0 = discretize_u0(g, sine02);
        const Trajectory ut = solve(cfg, u0, n / 2, 1);
        const Trajectory vt = solve(cfg, v_from_u(u0), n / 2, 1);
        double theta = 0.0;
        for (long nn = 1; nn < 2 * n; nn += 2) {
            const EntropySandwich s = entropy_sandwich(ut, vt, cfg, nn, n / 2);
            theta = std::max(theta, (s.lower - s.u_value) / g.dx());
            theta = std::max(theta, (s.u_value - s.upper) / g.dx());
        }
        return theta;
    };
    const double t16 = theta_needed(16);
    const double t32 = theta_needed(32);
    INFO("theta by mesh: " << t16 << " " << t32);
    CHECK(t16 <= 2.0);
    CHECK(t32 <= 2.0);
    CHECK(t32 <= 1.5 * t16 + 0.1);
}
