#pragma once

#include <vector>

namespace robustq {

// u(x) = -sum_i c_i exp(-gamma_i x), a finite mixture of exponential utilities.
class UtilitySpec {
public:
    UtilitySpec(std::vector<double> weights, std::vector<double> rates);

    const std::vector<double>& weights() const { return c_; }
    const std::vector<double>& rates() const { return gamma_; }
    std::size_t size() const { return c_.size(); }

    struct Checked {
        double value;
        bool overflow;
    };

    // u(x); saturates to -inf when the sum overflows.
    double u(double x) const;
    // u^{(k)}(x) = (-1)^{k+1} sum_i c_i gamma_i^k exp(-gamma_i x), k >= 1.
    double derivative(double x, int k) const;

    Checked u_checked(double x) const;
    Checked derivative_checked(double x, int k) const;

    // log |u^{(k)}(x)| for k >= 0 (k = 0 is log(-u)).
    double log_abs_derivative(double x, int k) const;

    bool operator==(const UtilitySpec&) const = default;

private:
    std::vector<double> c_;
    std::vector<double> gamma_;
    std::vector<double> log_c_;
    std::vector<double> log_gamma_;
};

}  // namespace robustq
