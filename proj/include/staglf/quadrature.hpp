#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "staglf/common.hpp"

namespace staglf {

struct GaussRule {
    std::vector<double> nodes;    // on [-1,1]
    std::vector<double> weights;
};

// Gauss-Legendre nodes/weights by Newton iteration on the Legendre polynomial.
inline GaussRule gauss_legendre(int order) {
    if (order < 1) throw NumericError("gauss_legendre: order must be >= 1");
    GaussRule rule;
    rule.nodes.resize(static_cast<std::size_t>(order));
    rule.weights.resize(static_cast<std::size_t>(order));
    const int n = order;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Chebyshev-based initial guess.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[static_cast<std::size_t>(i)] = -x;
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    return rule;
}

// Composite Gauss-Legendre integral of f over [a,b].
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        int order = 8, int pieces = 1) {
    const GaussRule rule = gauss_legendre(order);
    double total = 0.0;
    const double hw = (b - a) / pieces;
    for (int p = 0; p < pieces; ++p) {
        const double lo = a + p * hw;
        const double mid = lo + 0.5 * hw;
        const double half = 0.5 * hw;
        double acc = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
        total += acc * half;
    }
    return total;
}

}  // namespace staglf
