#include "robustq/utility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "robustq/errors.hpp"

namespace robustq {

UtilitySpec::UtilitySpec(std::vector<double> weights, std::vector<double> rates)
    : c_(std::move(weights)), gamma_(std::move(rates)) {
    if (c_.empty() || c_.size() != gamma_.size())
        throw DomainError("UtilitySpec: weights and rates must be non-empty and of equal length");
    for (std::size_t i = 0; i < c_.size(); ++i) {
        if (!(c_[i] > 0.0) || !std::isfinite(c_[i])) throw DomainError("UtilitySpec: weights must be positive");
        if (!(gamma_[i] > 0.0) || !std::isfinite(gamma_[i])) throw DomainError("UtilitySpec: rates must be positive");
        log_c_.push_back(std::log(c_[i]));
        log_gamma_.push_back(std::log(gamma_[i]));
    }
}

double UtilitySpec::log_abs_derivative(double x, int k) const {
    if (k < 0) throw DomainError("UtilitySpec: derivative order must be >= 0");
    double shift = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < c_.size(); ++i)
        shift = std::max(shift, log_c_[i] + k * log_gamma_[i] - gamma_[i] * x);
    double sum = 0.0;
    for (std::size_t i = 0; i < c_.size(); ++i)
        sum += std::exp(log_c_[i] + k * log_gamma_[i] - gamma_[i] * x - shift);
    return shift + std::log(sum);
}

UtilitySpec::Checked UtilitySpec::u_checked(double x) const {
    const double log_mag = log_abs_derivative(x, 0);
    if (log_mag > std::log(std::numeric_limits<double>::max()))
        return {-std::numeric_limits<double>::infinity(), true};
    return {-std::exp(log_mag), false};
}

UtilitySpec::Checked UtilitySpec::derivative_checked(double x, int k) const {
    if (k < 1) throw DomainError("u_deriv: order must be >= 1");
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    const double log_mag = log_abs_derivative(x, k);
    if (log_mag > std::log(std::numeric_limits<double>::max()))
        return {sign * std::numeric_limits<double>::infinity(), true};
    return {sign * std::exp(log_mag), false};
}

double UtilitySpec::u(double x) const { return u_checked(x).value; }

double UtilitySpec::derivative(double x, int k) const { return derivative_checked(x, k).value; }

}  // namespace robustq
