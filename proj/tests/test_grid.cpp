#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "staglf/grid.hpp"

using namespace staglf;
using Catch::Approx;

namespace {
const auto sine = [](double x) { return std::sin(2.0 * M_PI * x); };
}

TEST_CASE("grid geometry and validation") {
    const StaggeredGrid g(4, 8);
    CHECK(g.dx() == Approx(0.125));
    CHECK(g.dt() == Approx(0.0625));
    CHECK(g.lambda() == Approx(0.5));
    CHECK(g.cols() == 8);
    CHECK_THROWS_AS(StaggeredGrid(8, 4), NumericError);  // lambda > 1
    CHECK_THROWS_AS(StaggeredGrid(0, 4), NumericError);
}

TEST_CASE("periodic column indexing") {
    const StaggeredGrid g(4, 4);
    GridField f(g, Parity::Even, 0);
    for (int i = 0; i < g.N; ++i) f.vals[i] = 10.0 + i;
    for (int i = 0; i < g.N; ++i) {
        const int m = f.col_of(i);
        CHECK(f.at_col(m) == f.at_col(m + 2 * g.N));
        CHECK(f.at_col(m) == f.at_col(m - 2 * g.N));
    }
    CHECK_THROWS_AS(f.at_col(1), NumericError);  // wrong parity column
}

TEST_CASE("discretize_u0: zero data gives zeros") {
    const StaggeredGrid g(8, 8);
    const GridField f = discretize_u0(g, [](double) { return 0.0; });
    for (double v : f.vals) CHECK(v == 0.0);
}

TEST_CASE("discretize_u0: sine on N=2 averages to zero by symmetry") {
    const StaggeredGrid g(2, 2);
    const GridField f = discretize_u0(g, sine);
    CHECK(f.at_col(0) == Approx(0.0).margin(1e-14));
    CHECK(f.at_col(2) == Approx(0.0).margin(1e-14));
}

TEST_CASE("discretize_u0: sine on N=4 against a high-order quadrature oracle") {
    const StaggeredGrid g(4, 4);
    const GridField f = discretize_u0(g, sine);
    const double oracle = integrate(sine, 0.125, 0.375, 16, 16) / 0.25;
    REQUIRE(oracle == Approx(0.9003163161571062).margin(1e-12));
    CHECK(f.at_col(2) == Approx(oracle).margin(1e-12));
    CHECK(std::abs(f.mean()) <= 1e-15);
}

TEST_CASE("discretize_u0: nonzero mean rejected") {
    const StaggeredGrid g(4, 4);
    CHECK_THROWS_AS(discretize_u0(g, [](double) { return 0.3; }), NumericError);
}

TEST_CASE("discretize_v0: constant for zero data and exact discrete derivative") {
    const StaggeredGrid g(8, 8);
    const GridField v0 = discretize_v0(g, [](double) { return 0.0; }, 1.25);
    for (double v : v0.vals) CHECK(v == Approx(1.25));

    const GridField u = discretize_u0(g, sine);
    const GridField v = discretize_v0(g, sine);
    const GridField ud = u_from_v(v);
    for (int i = 0; i < g.N; ++i)
        CHECK(ud.vals[i] == Approx(u.vals[i]).margin(1e-14));
}

TEST_CASE("discretize_v0 approximates the antiderivative") {
    // oracle: v0(x) = -cos(2 pi x)/(2 pi) + C with C fixed by v(-dx)=0
    auto anti = [](double x) { return -std::cos(2.0 * M_PI * x) / (2.0 * M_PI); };

    SECTION("node values are exact: whole-cell integrals telescope") {
        const StaggeredGrid g(16, 16);
        const GridField v = discretize_v0(g, sine);
        const double shift = anti(-g.dx());
        for (int i = 0; i < g.N; ++i)
            CHECK(v.vals[i] == Approx(anti(v.x_of(i)) - shift).margin(1e-13));
    }
    SECTION("between nodes the linear interpolant deviates at O(dx^2)") {
        auto dev = [&](int n) {
            const StaggeredGrid g(n, n);
            const GridField v = discretize_v0(g, sine);
            const double shift = anti(-g.dx());
            double worst = 0.0;
            for (int s = 0; s < 16 * g.N; ++s) {
                const double x = (s + 0.5) / (16.0 * g.N);
                worst = std::max(worst, std::abs(eval_v_field(v, x) - (anti(x) - shift)));
            }
            return worst;
        };
        const double d16 = dev(16);
        const double d32 = dev(32);
        CHECK(d16 < 2.0 * M_PI / 2048.0 * 1.05);  // |v''| (2dx)^2 / 8 curvature bound
        CHECK(d32 < d16 / 3.0);
    }
}

TEST_CASE("u_from_v: constant and linear data") {
    const StaggeredGrid g(8, 8);
    GridField v(g, Parity::Odd, 0);
    for (auto& x : v.vals) x = 3.7;
    const GridField u0 = u_from_v(v);
    for (double u : u0.vals) CHECK(u == 0.0);

    const double a = 0.01;
    for (int i = 0; i < g.N; ++i) v.vals[i] = a * v.col_of(i);
    const GridField u1 = u_from_v(v);
    // interior columns only; the wrap seam is not linear
    for (int i = 1; i + 1 < g.N; ++i)
        CHECK(u1.vals[i] == Approx(a / g.dx()).margin(1e-12));
}

TEST_CASE("field reconstructions") {
    const StaggeredGrid g(8, 8);
    const GridField u = discretize_u0(g, sine);
    const GridField v = discretize_v0(g, sine);

    SECTION("node queries return stored values") {
        for (int i = 0; i < g.N; ++i) {
            CHECK(eval_u_field(u, u.x_of(i)) == u.vals[i]);
            CHECK(eval_v_field(v, v.x_of(i)) == Approx(v.vals[i]).margin(1e-15));
        }
    }
    SECTION("v slope equals u inside a linear piece") {
        for (int i = 0; i < g.N; ++i) {
            const double xc = u.x_of(i);  // cell center of u = midpoint of a v piece
            const double d = 0.4 * g.dx();
            const double slope = (eval_v_field(v, xc + d) - eval_v_field(v, xc - d)) / (2.0 * d);
            CHECK(slope == Approx(eval_u_field(u, xc)).margin(1e-10));
        }
    }
    SECTION("midpoint of a v piece is the mean of its endpoints") {
        for (int i = 0; i < g.N; ++i) {
            const int ml = v.col_of(i);
            const double mid = g.x_of(ml) + g.dx();
            CHECK(eval_v_field(v, mid) ==
                  Approx(0.5 * (v.at_col(ml) + v.at_col(ml + 2))).margin(1e-14));
        }
    }
    SECTION("v reconstruction is continuous across piece boundaries") {
        for (int i = 0; i < g.N; ++i) {
            const double xb = v.x_of(i);
            const double eps = 1e-9;
            const double jump =
                std::abs(eval_v_field(v, wrap_unit(xb + eps)) - eval_v_field(v, wrap_unit(xb - eps)));
            CHECK(jump <= 1e-7);
        }
    }
}

TEST_CASE("l1 distance basics") {
    const StaggeredGrid g(8, 8);
    const GridField a = discretize_u0(g, sine);
    GridField b = a;
    CHECK(l1_distance(a, b) == 0.0);
    b.vals[3] += 0.5;
    CHECK(l1_distance(a, b) == Approx(0.5 * 2.0 * g.dx()));
}
