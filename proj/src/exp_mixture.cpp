#include "robustq/detail/exp_mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "robustq/errors.hpp"

namespace robustq::detail {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double log_add_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

LogSum exp_mixture_log(std::span<const double> log_coef, std::span<const double> rate, double xi) {
    double shift = kNegInf;
    for (std::size_t t = 0; t < log_coef.size(); ++t) {
        if (log_coef[t] == kNegInf) continue;
        shift = std::max(shift, log_coef[t] - rate[t] * xi);
    }
    if (shift == kNegInf) return {kNegInf, 0.0};
    double sum = 0.0;
    double weighted = 0.0;
    for (std::size_t t = 0; t < log_coef.size(); ++t) {
        if (log_coef[t] == kNegInf) continue;
        const double e = std::exp(log_coef[t] - rate[t] * xi - shift);
        sum += e;
        weighted += rate[t] * e;
    }
    return {shift + std::log(sum), -weighted / sum};
}

double exp_mixture_root(std::span<const double> log_coef, std::span<const double> rate,
                        double log_target) {
    if (!std::isfinite(log_target)) throw DomainError("exp_mixture_root: target must be positive and finite");
    double lo = -std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    std::size_t active = 0;
    for (std::size_t t = 0; t < log_coef.size(); ++t) {
        if (log_coef[t] == kNegInf) continue;
        if (!(rate[t] > 0.0)) throw DomainError("exp_mixture_root: rates must be positive");
        ++active;
    }
    if (active == 0) throw DomainError("exp_mixture_root: no active terms");
    const double log_count = std::log(static_cast<double>(active));
    for (std::size_t t = 0; t < log_coef.size(); ++t) {
        if (log_coef[t] == kNegInf) continue;
        // Every term is <= target at the root, and some term is >= target / count.
        lo = std::max(lo, (log_coef[t] - log_target) / rate[t]);
        hi = std::max(hi, (log_coef[t] - log_target + log_count) / rate[t]);
    }
    if (hi - lo <= 0.0) return lo;

    double xi = lo;
    for (int iter = 0; iter < 100; ++iter) {
        const LogSum f = exp_mixture_log(log_coef, rate, xi);
        const double residual = f.value - log_target;
        if (std::abs(residual) <= 1e-14) return xi;
        if (residual > 0.0) lo = std::max(lo, xi);
        else hi = std::min(hi, xi);
        double next = xi - residual / f.slope;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == xi) return xi;
        xi = next;
    }
    // Newton stalled; finish by bisection on the maintained bracket.
    for (int iter = 0; iter < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (exp_mixture_log(log_coef, rate, mid).value > log_target) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace robustq::detail
