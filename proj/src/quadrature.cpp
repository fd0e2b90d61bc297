#include "robustq/quadrature.hpp"

#include <array>
#include <cmath>
#include <mutex>
#include <numbers>

#include "robustq/errors.hpp"

namespace robustq {

namespace {

GaussLegendre build_rule(int n) {
    GaussLegendre rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p2) / j;
            }
            dp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

}  // namespace

const GaussLegendre& gauss_legendre(int n) {
    static std::array<GaussLegendre, 65> cache;
    static std::array<std::once_flag, 65> flags;
    if (n < 1 || n > 64) throw DomainError("gauss_legendre: n must lie in [1, 64]");
    std::call_once(flags[n], [n] { cache[n] = build_rule(n); });
    return cache[n];
}

std::vector<double> trapezoid_weights(std::size_t n, double h) {
    std::vector<double> w(n, h);
    if (n > 0) {
        w.front() *= 0.5;
        w.back() *= 0.5;
    }
    if (n == 1) w.front() = 0.0;
    return w;
}

}  // namespace robustq
