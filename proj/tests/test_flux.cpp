#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "staglf/flux.hpp"

using namespace staglf;
using Catch::Approx;

namespace {

// Independent oracle: golden-section maximization of p -> xi*p - H(x,t,p).
struct GoldenMax {
    double p_star;
    double value;
};

GoldenMax golden_max(const FluxModel& m, double x, double t, double xi, double lo, double hi) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    auto f = [&](double p) { return xi * p - m.h(x, t, p); };
    double a = lo, b = hi;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    for (int it = 0; it < 200 && (b - a) > 1e-12; ++it) {
        if (f(c) > f(d)) { b = d; } else { a = c; }
        c = b - gr * (b - a);
        d = a + gr * (b - a);
    }
    const double p = 0.5 * (a + b);
    return {p, f(p)};
}

}  // namespace

TEST_CASE("legendre: quadratic flux is self-dual") {
    const FluxModel m = make_quadratic();
    const LegendreResult r = legendre(m, 0.3, 0.7, 1.0);
    CHECK(r.value == Approx(0.5).margin(1e-12));
    CHECK(r.p_star == Approx(1.0).margin(1e-12));
    CHECK(r.residual <= 1e-12);
}

TEST_CASE("legendre: additive potential flips sign in L") {
    const FluxModel m = make_mechanical(0.25);
    const LegendreResult r = legendre(m, 0.0, 0.0, 0.0);
    CHECK(r.value == Approx(-0.25).margin(1e-12));
    CHECK(r.p_star == Approx(0.0).margin(1e-12));
}

TEST_CASE("legendre: quartic flux against golden-section oracle") {
    const FluxModel m = make_quartic(0.0);
    const GoldenMax oracle = golden_max(m, 0.0, 0.0, 16.0, -10.0, 10.0);
    // frozen oracle values: p* = 16^{1/3}, L = (3/4) 16^{4/3}
    REQUIRE(oracle.p_star == Approx(2.5198420997897464).margin(1e-8));
    REQUIRE(oracle.value == Approx(30.238105197476959).margin(1e-8));
    const LegendreResult r = legendre(m, 0.0, 0.0, 16.0);
    CHECK(r.p_star == Approx(oracle.p_star).margin(1e-8));
    CHECK(r.value == Approx(oracle.value).margin(1e-8));
}

TEST_CASE("lagrangian_shifted examples") {
    const FluxModel q = make_quadratic();
    CHECK(lagrangian_shifted(q, 0.0, 0.0, 1.0, 1.0) == Approx(-0.5).margin(1e-12));
    CHECK(lagrangian_shifted(q, 0.2, 0.9, 0.0, 3.7) == Approx(0.0).margin(1e-12));
    const FluxModel m4 = make_quartic(0.0);
    CHECK(lagrangian_shifted(m4, 0.0, 0.0, 16.0, 2.0) ==
          Approx(30.238105197476959 - 32.0).margin(1e-8));
}

TEST_CASE("Fenchel-Young inequality at random points") {
    const FluxModel models[] = {make_quadratic(), make_mechanical(0.25), make_timedep(0.1),
                                make_quartic(0.3)};
    for (const auto& m : models) {
        for (int i = 0; i < 100; ++i) {
            const double x = counter_uniform(7, 0, i);
            const double t = counter_uniform(7, 1, i);
            const double xi = 4.0 * (counter_uniform(7, 2, i) - 0.5);
            const double p = 6.0 * (counter_uniform(7, 3, i) - 0.5);
            const double L = legendre(m, x, t, xi).value;
            REQUIRE(L + m.h(x, t, p) - xi * p >= -1e-10);
        }
    }
}

TEST_CASE("legendre inverts Hp") {
    const FluxModel models[] = {make_quadratic(), make_mechanical(0.25), make_quartic(0.2)};
    for (const auto& m : models) {
        for (int i = 0; i < 50; ++i) {
            const double x = counter_uniform(11, 0, i);
            const double t = counter_uniform(11, 1, i);
            const double p0 = 5.0 * (counter_uniform(11, 2, i) - 0.5);
            if (m.name == "quartic" && std::abs(p0) < 0.2) continue;  // flat Hp near 0
            const double xi = m.hp(x, t, p0);
            CHECK(legendre(m, x, t, xi).p_star == Approx(p0).margin(1e-7));
        }
    }
}

TEST_CASE("verify_assumptions: quadratic passes with alpha 0") {
    const AssumptionReport rep = verify_assumptions(make_quadratic(), 8, 0.0, 0.0, -3.0, 3.0);
    CHECK(rep.all());
    CHECK(rep.min_hpp == Approx(1.0));
    CHECK(rep.alpha == Approx(0.0).margin(1e-12));
}

TEST_CASE("verify_assumptions: mechanical passes with bounded alpha") {
    const AssumptionReport rep = verify_assumptions(make_mechanical(0.25), 12, 0.0, 0.0, -3.0, 3.0);
    CHECK(rep.all());
    // |L_x| = |A 2 pi sin| <= pi/2 for A = 1/4
    CHECK(rep.alpha > 0.0);
    CHECK(rep.alpha <= 0.5 * M_PI + 1e-9);
}

TEST_CASE("verify_assumptions: flags a nonconvex flux") {
    FluxModel bad = make_quadratic();
    bad.name = "nonconvex";
    bad.H = [](double, double, double p) { return 0.5 * p * p + 2.0 * std::sin(p); };
    bad.Hp = [](double, double, double p) { return p + 2.0 * std::cos(p); };
    bad.Hpp = [](double, double, double p) { return 1.0 - 2.0 * std::sin(p); };
    const AssumptionReport rep = verify_assumptions(bad, 12, 0.0, 0.0, -3.0, 3.0);
    CHECK_FALSE(rep.convex_ok);
    CHECK(rep.min_hpp < 0.0);
}

TEST_CASE("apriori constants: quadratic lattice values") {
    // inflation 1 so the lattice extrema come through exactly
    const AprioriConstants k = apriori_constants(make_quadratic(), 1.0, 1.0, 0.0, 0.0, 1.0, 64, 1.0);
    // oracle: sup_{|xi|<=1} |xi^2/2| * 1 = 0.5 by direct lattice maximization
    double c1 = 0.0;
    for (int i = 0; i < 64; ++i) {
        const double xi = -1.0 + 2.0 * i / 63.0;
        c1 = std::max(c1, std::abs(0.5 * xi * xi));
    }
    REQUIRE(c1 == Approx(0.5).margin(1e-14));
    CHECK(k.C1 == Approx(0.5).margin(1e-12));
    CHECK(k.H_pp_star == Approx(1.0));
    CHECK(k.H_xp_star == Approx(0.0).margin(1e-14));
    CHECK(k.H_xx_star == Approx(0.0).margin(1e-14));
    CHECK(k.E_star == Approx(0.0).margin(1e-12));
    CHECK(k.u_star == Approx(1.0).margin(1e-12));
}

TEST_CASE("apriori constants: mechanical E* from the curvature extrema") {
    const AprioriConstants k =
        apriori_constants(make_mechanical(0.25), 1.0, 1.0, 0.0, 0.0, 1.0, 64, 1.0);
    const double hxx = 0.25 * 4.0 * M_PI * M_PI;  // 9.8696...
    CHECK(k.H_xx_star == Approx(hxx).margin(1e-9));
    CHECK(k.E_star == Approx(std::sqrt(2.0 * hxx)).margin(1e-8));
}

TEST_CASE("apriori constants: E* is the root of the decay parabola") {
    // custom model with nonzero H_xp so all three terms participate
    FluxModel m = make_quadratic();
    m.name = "tilted";
    m.H = [](double x, double, double p) { return 0.5 * p * p + 0.3 * std::cos(2.0 * M_PI * x) * p; };
    m.Hp = [](double x, double, double p) { return p + 0.3 * std::cos(2.0 * M_PI * x); };
    m.Hx = [](double x, double, double p) { return -0.6 * M_PI * std::sin(2.0 * M_PI * x) * p; };
    m.Hpp = [](double, double, double) { return 1.0; };
    m.Hxp = [](double x, double, double) { return -0.6 * M_PI * std::sin(2.0 * M_PI * x); };
    m.Hxx = [](double x, double, double p) { return -1.2 * M_PI * M_PI * std::cos(2.0 * M_PI * x) * p; };

    for (double inflation : {1.0, 1.1}) {
        const AprioriConstants k =
            apriori_constants(m, 1.0, 1.0, -0.5, 0.5, 1.0, 32, inflation);
        const double res =
            0.5 * k.H_pp_star * k.E_star * k.E_star - 2.0 * k.H_xp_star * k.E_star - k.H_xx_star;
        CHECK(std::abs(res) <= 1e-10);
        CHECK(k.H_xp_star > 0.0);
        CHECK(k.eta >= 0.5 * k.H_pp_star);
        CHECK(k.E_star >= 0.0);
    }
}

TEST_CASE("apriori constants: beta1 finite across the time range") {
    const FluxModel m = make_mechanical(0.25);
    for (double t : {0.25, 0.5, 1.0, 2.0}) {
        const AprioriConstants k = apriori_constants(m, t, 1.0, -1.0, 1.0, 1.0, 16);
        CHECK(std::isfinite(k.beta1()));
        CHECK(k.beta1() > 0.0);
        CHECK(std::isfinite(k.C2));
    }
}

TEST_CASE("apriori constants: degenerate c window rejected") {
    CHECK_THROWS_AS(apriori_constants(make_quadratic(), 1.0, 1.0, 1.0, -1.0, 1.0),
                    NumericError);
}
