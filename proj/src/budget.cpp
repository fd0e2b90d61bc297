#include "robustq/budget.hpp"

#include <algorithm>
#include <cmath>

#include "robustq/errors.hpp"
#include "robustq/parallel.hpp"

namespace robustq {

double x_of_lambda(const RobustObjective& obj, const LognormalKernel& kernel, double lambda,
                   const SolverSettings& settings) {
    return solve(obj, kernel, lambda, settings).budget;
}

BudgetSolution lambda_of_x(const RobustObjective& obj, const LognormalKernel& kernel, double x,
                           const SolverSettings& settings, double rel_tol) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("lambda_of_x: x must be positive and finite");
    const double scale = obj.marginal_bound();
    const double tol = rel_tol * std::max(1.0, x);
    BudgetSolution out;

    auto eval = [&](double log_lambda) {
        ++out.evaluations;
        return solve(obj, kernel, std::exp(log_lambda), settings);
    };

    double lo = std::log(1e-6 * scale);
    double hi = std::log(1e6 * scale);
    SolveResult r_lo = eval(lo);
    for (int k = 0; r_lo.budget < x; ++k) {
        if (k == 8) throw UnattainableBudget("lambda_of_x: budget too large for the numerical range of lambda");
        hi = lo;
        lo -= std::log(1e3);
        r_lo = eval(lo);
    }
    if (std::abs(r_lo.budget - x) <= tol) {
        out.lambda = std::exp(lo);
        out.result = std::move(r_lo);
        return out;
    }
    SolveResult r_hi = eval(hi);
    for (int k = 0; r_hi.budget > x; ++k) {
        if (k == 8) throw UnattainableBudget("lambda_of_x: budget too small for the numerical range of lambda");
        lo = hi;
        hi += std::log(1e3);
        r_hi = eval(hi);
    }

    SolveResult best = std::move(r_hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        SolveResult r = eval(mid);
        const double err = r.budget - x;
        const bool done = std::abs(err) <= tol;
        if (err > 0.0) lo = mid;
        else hi = mid;
        if (std::abs(err) < std::abs(best.budget - x)) best = std::move(r);
        if (done) break;
    }
    if (!(std::abs(best.budget - x) <= tol))
        throw UnattainableBudget("lambda_of_x: bisection stalled before reaching the budget tolerance");
    out.lambda = best.lambda;
    out.result = std::move(best);
    return out;
}

bool BudgetCurve::strictly_decreasing() const {
    std::optional<double> prev;
    for (const Row& row : rows) {
        if (!row.x) continue;
        if (prev && !(*row.x < *prev)) return false;
        prev = row.x;
    }
    return true;
}

BudgetCurve budget_curve(const RobustObjective& obj, const LognormalKernel& kernel, std::vector<double> lambdas,
                         const SolverSettings& settings, std::size_t workers) {
    for (double l : lambdas)
        if (!(l > 0.0) || !std::isfinite(l)) throw DomainError("budget_curve: lambda values must be positive");
    std::sort(lambdas.begin(), lambdas.end());
    BudgetCurve curve;
    curve.rows.resize(lambdas.size());
    parallel_for(lambdas.size(), workers, [&](std::size_t i) {
        BudgetCurve::Row& row = curve.rows[i];
        row.lambda = lambdas[i];
        try {
            row.x = x_of_lambda(obj, kernel, lambdas[i], settings);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    });
    return curve;
}

}  // namespace robustq
