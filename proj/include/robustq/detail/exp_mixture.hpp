#pragma once

#include <span>

namespace robustq::detail {

// Solves  sum_t exp(log_coef[t] - rate[t] * xi) = exp(log_target)  for xi.
// The left side is strictly decreasing and log-convex in xi, so the root is
// unique; Newton on the log of the sum started at the left end of the
// analytic bracket converges monotonically. Terms with log_coef = -inf are
// ignored. Relative residual of the returned root is below ~1e-13.
double exp_mixture_root(std::span<const double> log_coef, std::span<const double> rate,
                        double log_target);

// log(sum_t exp(log_coef[t] - rate[t] * xi)) and its xi-derivative.
struct LogSum {
    double value;
    double slope;
};
LogSum exp_mixture_log(std::span<const double> log_coef, std::span<const double> rate, double xi);

double log_add_exp(double a, double b);

}  // namespace robustq::detail
