#include <doctest.h>

#include <cmath>

#include "robustq/budget.hpp"
#include "robustq/errors.hpp"
#include "support/oracles.hpp"

using namespace robustq;

namespace {

const LognormalKernel kKernel(0.02, 0.25, 1.0);

RobustObjective base_objective() {
    return RobustObjective(0.25, Claim(UniformClaim{2.0}), UtilitySpec({950.0, 950.0}, {0.010, 0.012}));
}

RobustObjective exponential(double gamma) {
    return RobustObjective(0.3, Claim(ConstantClaim{0.0}), UtilitySpec({1.0}, {gamma}));
}

}  // namespace

TEST_CASE("degenerate multiplier gives zero budget") {
    const auto obj = base_objective();
    CHECK(x_of_lambda(obj, kKernel, 1e9) == 0.0);
}

TEST_CASE("x(lambda) matches the closed form") {
    for (double gamma : {0.5, 1.0, 2.0}) {
        const auto obj = exponential(gamma);
        for (double lambda : {0.05, 0.4, 1.5}) {
            const double x = x_of_lambda(obj, kKernel, lambda);
            const double quad = oracles::closed_form_budget(gamma, lambda, 0.02, 0.25, 1.0);
            const double exact = oracles::closed_form_budget_analytic(gamma, lambda, 0.02, 0.25, 1.0);
            CHECK(quad == doctest::Approx(exact).epsilon(1e-8));
            CHECK(std::abs(x - quad) <= 1e-5 * std::max(1.0, quad));
        }
    }
}

TEST_CASE("x(lambda) decreases") {
    const auto obj = base_objective();
    double prev = x_of_lambda(obj, kKernel, 1.0);
    for (double lambda : {2.0, 4.0, 6.0, 8.0}) {
        const double x = x_of_lambda(obj, kKernel, lambda);
        CHECK(x < prev);
        prev = x;
    }
}

TEST_CASE("lambda_of_x round trips") {
    const auto obj = base_objective();
    for (double x : {0.5, 7.66, 20.0}) {
        const BudgetSolution s = lambda_of_x(obj, kKernel, x);
        CHECK(s.result.residuals.ok());
        CHECK(std::abs(s.result.budget - x) <= 1e-6 * std::max(1.0, x));
        CHECK(std::abs(x_of_lambda(obj, kKernel, s.lambda) - x) <= 1e-6 * std::max(1.0, x));
    }
    CHECK(lambda_of_x(obj, kKernel, 4.0).lambda > lambda_of_x(obj, kKernel, 8.0).lambda);
}

TEST_CASE("lambda_of_x matches the analytic root") {
    for (double gamma : {0.5, 2.0}) {
        const auto obj = exponential(gamma);
        for (double x : {0.3, 1.0, 3.0}) {
            const double lambda = lambda_of_x(obj, kKernel, x).lambda;
            const double exact = oracles::bisect_decreasing(
                [&](double l) { return oracles::closed_form_budget_analytic(gamma, l, 0.02, 0.25, 1.0); }, x, 1e-12,
                1e6);
            CHECK(lambda == doctest::Approx(exact).epsilon(1e-6));
        }
    }
}

TEST_CASE("budget curve") {
    const auto obj = base_objective();
    const BudgetCurve curve = budget_curve(obj, kKernel, {8.0, 1.0, 4.0, 2.0}, {}, 2);
    REQUIRE(curve.rows.size() == 4);
    CHECK(curve.rows.front().lambda == 1.0);
    for (const auto& row : curve.rows) CHECK(row.x.has_value());
    CHECK(curve.strictly_decreasing());
    CHECK_THROWS_AS(budget_curve(obj, kKernel, {1.0, -1.0}), DomainError);
}

TEST_CASE("budget errors") {
    const auto obj = base_objective();
    CHECK_THROWS_AS(lambda_of_x(obj, kKernel, 0.0), DomainError);
    CHECK_THROWS_AS(lambda_of_x(obj, kKernel, 1e7), UnattainableBudget);
}
