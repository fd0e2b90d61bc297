#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "robustq/distributions.hpp"
#include "robustq/robust_objective.hpp"

namespace robustq {

enum class SolveMode { ActiveSet, Penalized };

std::string to_string(SolveMode mode);
SolveMode parse_solve_mode(const std::string& text);

struct SolverSettings {
    int intervals = 4000;          // N; the grid has N + 1 points
    double eps_p = 1e-6;           // grid clipped to [eps_p, 1 - eps_p]
    double tolerance = 1e-6;       // obstacle and complementarity, utility units
    double ode_tolerance = 1e-5;   // discrete ODE residual
    SolveMode mode = SolveMode::ActiveSet;
    bool refine = true;            // one automatic refinement to 4N before failing

    bool operator==(const SolverSettings&) const = default;
};

// Uniform grid p_i = eps + i (1 - 2 eps) / N. The reflection 1 - p_i is the
// mirrored node p_{N-i}, so reflected() is exact on the grid.
class SolverGrid {
public:
    SolverGrid(int intervals, double eps_p);

    int intervals() const { return intervals_; }
    double eps() const { return eps_; }
    double step() const { return step_; }
    std::size_t size() const { return p_.size(); }
    const std::vector<double>& p() const { return p_; }
    double p(std::size_t i) const { return p_[i]; }
    double reflected(std::size_t i) const { return p_[p_.size() - 1 - i]; }

private:
    int intervals_;
    double eps_;
    double step_;
    std::vector<double> p_;
};

struct ResidualReport {
    double obstacle_min = 0.0;      // min_i (H - lambda eta)
    double complementarity = 0.0;   // sum (H - lambda eta) dQ
    double ode_max = 0.0;           // max |dH/dp - V_x(Q,p)| (trapezoid form)
    double second_order_max = 0.0;  // max |-H'' + L(H',p)| on flat segments
    std::size_t second_order_points = 0;
    bool zero_region_ok = true;     // Q = 0 for p <= pbar
    bool monotone_ok = true;        // Q nonnegative and non-decreasing
    double tolerance = 1e-6;
    double ode_tolerance = 1e-5;

    bool obstacle_ok() const { return obstacle_min >= -tolerance; }
    bool complementarity_ok() const { return complementarity <= tolerance && complementarity >= -tolerance; }
    bool ode_ok() const { return ode_max <= ode_tolerance; }
    bool ok() const { return obstacle_ok() && complementarity_ok() && ode_ok() && zero_region_ok && monotone_ok; }
};

struct SolveResult {
    SolverGrid grid{2, 0.25};
    double lambda = 0.0;
    double pbar = 0.0;
    std::vector<double> Q;           // optimal quantile on the grid
    std::vector<double> H;           // H(p) = -int_p^1 V_x(Q(s), s) ds
    std::vector<double> eta_scaled;  // lambda * eta(p) tabulated with the same rule as H
    std::vector<double> candidate;   // S(lambda Q_rho(1-p), p), unclamped
    std::vector<std::uint8_t> active;  // 1 where the obstacle is active (Q = candidate > 0)
    double budget = 0.0;             // int_0^1 Q(p) Q_rho(1-p) dp
    ResidualReport residuals;
    bool degenerate = false;         // pbar >= 1 - eps, Q = 0
    SolveMode mode = SolveMode::ActiveSet;
    SolverSettings settings;
};

class NonConvergence : public std::runtime_error {
public:
    NonConvergence(const std::string& what, SolveResult result)
        : std::runtime_error(what), result_(std::move(result)) {}
    const SolveResult& result() const { return result_; }

private:
    SolveResult result_;
};

// sup{p : lambda Q_rho(1-p) >= u'(Q_theta(0))} = 1 - F_rho(u'(Q_theta(0)) / lambda).
double pbar(const RobustObjective& obj, const LognormalKernel& kernel, double lambda);

// eta(p) = -int_p^1 Q_rho(1-s) ds, exact lognormal partial expectation.
double eta(const LognormalKernel& kernel, double p);

// Solves min{Q', H - lambda eta} = 0, H' = V_x(Q,p), H(1) = 0, Q = 0 on (0, pbar].
// Throws NonConvergence (carrying the last result) if residuals stay above
// tolerance after the optional refinement.
SolveResult solve(const RobustObjective& obj, const LognormalKernel& kernel, double lambda,
                  const SolverSettings& settings = {});

// Single attempt on the given grid; never throws on residual failure.
SolveResult solve_on_grid(const RobustObjective& obj, const LognormalKernel& kernel, double lambda,
                          const SolverSettings& settings);

// Recomputes the residual families for (possibly modified) result.Q and result.H.
ResidualReport residuals(const SolveResult& result, const RobustObjective& obj, const LognormalKernel& kernel,
                         double lambda);

// Continuous reconstruction of the solver quantile between nodes:
// median(Q_i, candidate(p), Q_{i+1}) on each cell, held constant outside the grid.
double reconstruct_quantile(const SolveResult& result, const RobustObjective& obj,
                            const LognormalKernel& kernel, double p);

}  // namespace robustq
