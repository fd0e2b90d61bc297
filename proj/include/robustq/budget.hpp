#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "robustq/vi_solver.hpp"

namespace robustq {

// x(lambda) = int_0^1 Q_lambda(p) Q_rho(1-p) dp; 0 in the degenerate regime.
double x_of_lambda(const RobustObjective& obj, const LognormalKernel& kernel, double lambda,
                   const SolverSettings& settings = {});

struct BudgetSolution {
    double lambda = 0.0;
    SolveResult result;
    int evaluations = 0;
};

// Bisection in log(lambda) on [1e-6, 1e6] * u'(Q_theta(0)), widened by factors of
// 1e3 when needed. Meets |x(lambda) - x| <= rel_tol * max(1, x).
// Throws UnattainableBudget if no bracket is found.
BudgetSolution lambda_of_x(const RobustObjective& obj, const LognormalKernel& kernel, double x,
                           const SolverSettings& settings = {}, double rel_tol = 1e-10);

struct BudgetCurve {
    struct Row {
        double lambda;
        std::optional<double> x;  // empty when the solve failed
        std::string error;
    };
    std::vector<Row> rows;  // sorted by lambda

    // True when every present x strictly decreases with lambda.
    bool strictly_decreasing() const;
};

BudgetCurve budget_curve(const RobustObjective& obj, const LognormalKernel& kernel, std::vector<double> lambdas,
                         const SolverSettings& settings = {}, std::size_t workers = 1);

}  // namespace robustq
