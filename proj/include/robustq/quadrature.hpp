#pragma once

#include <span>
#include <vector>

namespace robustq {

// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Cached rule with n points (1 <= n <= 64); thread-safe after first use.
const GaussLegendre& gauss_legendre(int n);

// Weights of the composite trapezoid rule on a uniform grid of n points with spacing h.
std::vector<double> trapezoid_weights(std::size_t n, double h);

}  // namespace robustq
