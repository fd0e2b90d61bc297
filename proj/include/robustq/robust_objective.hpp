#pragma once

#include <vector>

#include "robustq/distributions.hpp"
#include "robustq/utility.hpp"

namespace robustq {

// Monotone quantile known on a grid in [0,1).
class GridQuantile {
public:
    enum class Interpolation { Linear, Step };

    // Values must be non-decreasing (1e-12 slack, absorbed) and nonnegative.
    GridQuantile(std::vector<double> grid, std::vector<double> values,
                 Interpolation rule = Interpolation::Linear);
    // n equal-weight atoms as a right-continuous step quantile with breaks at k/n.
    static GridQuantile from_atoms(std::vector<double> atoms);

    double operator()(double p) const;

    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    Interpolation rule() const { return rule_; }

private:
    std::vector<double> grid_;
    std::vector<double> values_;
    Interpolation rule_;
};

// V(x,p) = (1-alpha) u(x + Q_theta(p)) + alpha u(x + Q_theta(1-p)) and the maps built on it.
class RobustObjective {
public:
    RobustObjective(double alpha, Claim claim, UtilitySpec utility);

    double alpha() const { return alpha_; }
    const Claim& claim() const { return claim_; }
    const UtilitySpec& utility() const { return utility_; }

    double V(double x, double p) const;
    // k-th partial derivative in x, k >= 1.
    double V_x(double x, double p, int k = 1) const;
    // Mixed partial d^2 V / dx dp; needs a differentiable claim.
    double V_xp(double x, double p) const;

    // The unique xi with dV/dx(xi, p) = w, w > 0.
    double S_inverse(double w, double p) const;
    // d^2 V / dx dp evaluated at (S_inverse(w, p), p).
    double L_operator(double w, double p) const;

    // Variants taking the reflected probability explicitly (pc = 1 - p), used on
    // symmetric grids where pc is computed from the mirrored index.
    double V(double x, double p, double pc) const;
    double V_x(double x, double p, double pc, int k) const;
    double S_inverse(double w, double p, double pc) const;

    // J_alpha of a quantile: trapezoid over the grid for Linear quantiles,
    // exact piecewise integration for Step quantiles against discrete claims.
    double J_alpha(const GridQuantile& q) const;

    // u'(Q_theta(0)), the supremum of dV/dx over x >= 0.
    double marginal_bound() const;

private:
    double alpha_;
    Claim claim_;
    UtilitySpec utility_;
    std::vector<double> log_cg_;  // log(c_i gamma_i)
};

}  // namespace robustq
