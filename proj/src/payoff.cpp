#include "robustq/payoff.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "robustq/errors.hpp"
#include "robustq/normal.hpp"

namespace robustq {

std::vector<double> default_rho_grid(const LognormalKernel& kernel, std::size_t points) {
    if (points < 2) throw DomainError("default_rho_grid: need at least two points");
    const double lo = std::log(kernel.quantile(0.001));
    const double hi = std::log(kernel.quantile(0.999));
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
    return grid;
}

double payoff_at(const SolveResult& result, const LognormalKernel& kernel, double rho) {
    if (!(rho > 0.0)) throw DomainError("payoff: state price must be positive");
    const double p = kernel.survival(rho);
    if (result.degenerate || p <= result.pbar) return 0.0;
    const auto& grid = result.grid;
    const auto& Q = result.Q;
    if (p <= grid.p(0)) return Q.front();
    if (p >= grid.p(grid.size() - 1)) return Q.back();
    std::size_t i = static_cast<std::size_t>((p - grid.eps()) / grid.step());
    i = std::min(i, grid.size() - 2);
    while (i > 0 && grid.p(i) > p) --i;
    while (i + 2 < grid.size() && grid.p(i + 1) <= p) ++i;
    const double t = (p - grid.p(i)) / (grid.p(i + 1) - grid.p(i));
    return Q[i] + std::clamp(t, 0.0, 1.0) * (Q[i + 1] - Q[i]);
}

PayoffProfile profile(const SolveResult& result, const LognormalKernel& kernel, const std::vector<double>& rho_grid) {
    PayoffProfile out;
    out.rho = rho_grid;
    out.payoff.reserve(rho_grid.size());
    for (std::size_t i = 0; i < rho_grid.size(); ++i) {
        if (i > 0 && !(rho_grid[i] > rho_grid[i - 1])) throw DomainError("profile: rho grid must be increasing");
        out.payoff.push_back(payoff_at(result, kernel, rho_grid[i]));
    }
    return out;
}

DistributionCheck distribution_check(const SolveResult& result, const RobustObjective& obj,
                                     const LognormalKernel& kernel, std::size_t sample_count, std::uint64_t seed) {
    DistributionCheck out;
    out.samples = sample_count;
    out.quadrature_budget = result.budget;
    if (sample_count < 2) throw DomainError("distribution_check: need at least two samples");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t k = 0; k < sample_count; ++k) {
        double u = unif(rng);
        while (u <= 0.0) u = unif(rng);
        const double x = reconstruct_quantile(result, obj, kernel, u);
        const double v = x == 0.0 ? 0.0 : x * kernel.quantile_complement(u);
        const double delta = v - mean;
        mean += delta / static_cast<double>(k + 1);
        m2 += delta * (v - mean);
    }
    out.mc_budget = mean;
    out.standard_error = std::sqrt(m2 / static_cast<double>(sample_count - 1) / static_cast<double>(sample_count));
    if (out.standard_error > 0.0) out.z_score = (out.mc_budget - out.quadrature_budget) / out.standard_error;
    return out;
}

}  // namespace robustq
