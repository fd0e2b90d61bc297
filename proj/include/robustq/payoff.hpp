#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "robustq/vi_solver.hpp"

namespace robustq {

struct PayoffProfile {
    std::vector<double> rho;     // increasing state prices
    std::vector<double> payoff;  // Q(1 - F_rho(rho)), non-increasing
    nlohmann::json metadata = nlohmann::json::object();
};

// `points` log-spaced state prices between Q_rho(0.001) and Q_rho(0.999).
std::vector<double> default_rho_grid(const LognormalKernel& kernel, std::size_t points = 2001);

// Terminal payoff as a function of the state price, by linear interpolation of the
// solver quantile at p = 1 - F_rho(rho). Zero for p <= pbar.
PayoffProfile profile(const SolveResult& result, const LognormalKernel& kernel, const std::vector<double>& rho_grid);

// Payoff at a single state price.
double payoff_at(const SolveResult& result, const LognormalKernel& kernel, double rho);

struct DistributionCheck {
    std::size_t samples = 0;
    double mc_budget = 0.0;       // sample mean of rho * X
    double standard_error = 0.0;
    double quadrature_budget = 0.0;
    double z_score = 0.0;         // (mc - quadrature) / standard error; 0 when both vanish
};

// Pushes U ~ Uniform(0,1) through X = Q(U), rho = Q_rho(1-U) and compares E[rho X]
// with the quadrature budget.
DistributionCheck distribution_check(const SolveResult& result, const RobustObjective& obj,
                                     const LognormalKernel& kernel, std::size_t sample_count,
                                     std::uint64_t seed = 20240611);

}  // namespace robustq
