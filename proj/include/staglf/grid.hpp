#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "staglf/common.hpp"
#include "staglf/quadrature.hpp"

namespace staglf {

// ---------------------------------------------------------------------------
// Staggered space-time lattice on the unit torus. 2N columns per period,
// dx = 1/(2N), dt = 1/(2K); the CFL ratio lambda = dt/dx = N/K needs N <= K.
// u-values live at nodes with m+k even, v-values at nodes with m+k odd.
// ---------------------------------------------------------------------------

struct StaggeredGrid {
    int N = 1;
    int K = 1;

    StaggeredGrid() = default;
    StaggeredGrid(int n, int k) : N(n), K(k) {
        if (n < 1 || k < 1) throw NumericError("StaggeredGrid: N,K must be positive");
        if (n > k) throw NumericError("StaggeredGrid: N <= K required (lambda <= 1)");
    }

    double dx() const { return 1.0 / (2.0 * N); }
    double dt() const { return 1.0 / (2.0 * K); }
    double lambda() const { return static_cast<double>(N) / K; }
    int cols() const { return 2 * N; }
    int steps_per_period() const { return 2 * K; }
    double x_of(long m) const { return m * dx(); }
    double t_of(long k) const { return k * dt(); }

    bool operator==(const StaggeredGrid& o) const { return N == o.N && K == o.K; }
};

enum class Parity { Even, Odd };  // Even <-> u-type, Odd <-> v-type

// One time level of grid data, stored compactly: the N columns whose parity
// matches m+k. Column indices wrap modulo 2N.
struct GridField {
    StaggeredGrid grid;
    Parity parity = Parity::Even;
    int k = 0;
    std::vector<double> vals;  // slot i holds column offset()+2i

    GridField() = default;
    GridField(const StaggeredGrid& g, Parity p, int step)
        : grid(g), parity(p), k(step), vals(static_cast<std::size_t>(g.N), 0.0) {}

    int offset() const { return (k + (parity == Parity::Odd ? 1 : 0)) & 1; }
    int col_of(int slot) const { return offset() + 2 * slot; }
    double x_of(int slot) const { return grid.x_of(col_of(slot)); }
    double t() const { return grid.t_of(k); }

    bool owns_col(long m) const { return ((m - offset()) & 1) == 0; }

    int slot_of(long m) const {
        const int mm = wrap_col(m, grid.cols());
        if (((mm - offset()) & 1) != 0) throw NumericError("GridField: column parity mismatch");
        return (mm - offset()) / 2;
    }

    double at_col(long m) const { return vals[static_cast<std::size_t>(slot_of(m))]; }
    double& at_col(long m) { return vals[static_cast<std::size_t>(slot_of(m))]; }

    // sum of values * 2dx; the conserved quantity for u-fields
    double mean() const {
        double s = std::accumulate(vals.begin(), vals.end(), 0.0);
        return s / grid.N;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : vals) m = std::max(m, std::abs(v));
        return m;
    }

    void recenter() {
        const double mu = mean();
        for (double& v : vals) v -= mu;
    }
};

// L1 distance on the torus between same-shape fields.
inline double l1_distance(const GridField& a, const GridField& b) {
    if (!(a.grid == b.grid) || a.parity != b.parity || a.offset() != b.offset())
        throw NumericError("l1_distance: incompatible fields");
    double s = 0.0;
    for (std::size_t i = 0; i < a.vals.size(); ++i) s += std::abs(a.vals[i] - b.vals[i]);
    return s * 2.0 * a.grid.dx();
}

inline double linf_distance(const GridField& a, const GridField& b) {
    if (!(a.grid == b.grid) || a.parity != b.parity || a.offset() != b.offset())
        throw NumericError("linf_distance: incompatible fields");
    double s = 0.0;
    for (std::size_t i = 0; i < a.vals.size(); ++i) s = std::max(s, std::abs(a.vals[i] - b.vals[i]));
    return s;
}

// ---------------------------------------------------------------------------
// Initial-data discretization.
// ---------------------------------------------------------------------------

// Cell averages of u0 over [x_m - dx, x_m + dx) for even m, then exact
// re-centering. Rejects data whose quadrature mean exceeds mean_tol.
inline GridField discretize_u0(const StaggeredGrid& g, const std::function<double(double)>& u0,
                               int quad_order = 8, double mean_tol = 1e-8) {
    GridField f(g, Parity::Even, 0);
    const double dx = g.dx();
    double total = 0.0;
    for (int i = 0; i < g.N; ++i) {
        const double xm = f.x_of(i);
        const double cell = integrate(u0, xm - dx, xm + dx, quad_order, 4);
        f.vals[static_cast<std::size_t>(i)] = cell / (2.0 * dx);
        total += cell;
    }
    if (std::abs(total) > mean_tol)
        throw NumericError("discretize_u0: initial data has nonzero mean beyond tolerance");
    f.recenter();
    return f;
}

// Discrete primitive of a u-field: v_{m+1} = v_{m-1} + 2dx * u_m, anchored at
// v(offset-1) = anchor. Gives D_x v = u exactly (up to the wrap rounding).
inline GridField v_from_u(const GridField& u, double anchor = 0.0) {
    if (u.parity != Parity::Even) throw NumericError("v_from_u: even field expected");
    GridField v(u.grid, Parity::Odd, u.k);
    const double two_dx = 2.0 * u.grid.dx();
    double acc = anchor;
    // columns offset-1, offset+1, ... ; slot order follows u's slots
    for (int i = 0; i < u.grid.N; ++i) {
        acc += two_dx * u.vals[static_cast<std::size_t>(i)];
        v.at_col(u.col_of(i) + 1) = acc;
    }
    return v;
}

// v0 via cell-averaged u0 and the discrete primitive; anchor v0(-dx) = anchor.
inline GridField discretize_v0(const StaggeredGrid& g, const std::function<double(double)>& u0,
                               double anchor = 0.0, int quad_order = 8, double mean_tol = 1e-8) {
    return v_from_u(discretize_u0(g, u0, quad_order, mean_tol), anchor);
}

// Central difference D_x v at the even columns.
inline GridField u_from_v(const GridField& v) {
    if (v.parity != Parity::Odd) throw NumericError("u_from_v: odd field expected");
    GridField u(v.grid, Parity::Even, v.k);
    const double inv = 1.0 / (2.0 * v.grid.dx());
    for (int i = 0; i < v.grid.N; ++i) {
        const int m = u.col_of(i);
        u.vals[static_cast<std::size_t>(i)] = (v.at_col(m + 1) - v.at_col(m - 1)) * inv;
    }
    return u;
}

// ---------------------------------------------------------------------------
// Spatial reconstructions of a single time level.
// ---------------------------------------------------------------------------

// Step reconstruction: u_field value on [x_{m-1}, x_{m+1}) around its own
// column m.
inline double eval_u_field(const GridField& u, double x) {
    if (u.parity != Parity::Even) throw NumericError("eval_u_field: even field expected");
    const double dx = u.grid.dx();
    const double s = wrap_unit(x) / dx - u.offset();
    const long j = static_cast<long>(std::floor((s + 1.0) / 2.0));
    return u.at_col(u.offset() + 2 * j);
}

// Piecewise-linear reconstruction between consecutive stored v-columns.
inline double eval_v_field(const GridField& v, double x) {
    if (v.parity != Parity::Odd) throw NumericError("eval_v_field: odd field expected");
    const double dx = v.grid.dx();
    const double s = wrap_unit(x) / dx - v.offset();
    const long j = static_cast<long>(std::floor(s / 2.0));
    const long ml = v.offset() + 2 * j;
    const double a = v.at_col(ml);
    const double b = v.at_col(ml + 2);
    const double frac = (s - 2.0 * j) / 2.0;  // in [0,1)
    return a + (b - a) * frac;
}

}  // namespace staglf
