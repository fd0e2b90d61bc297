#include "robustq/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "robustq/errors.hpp"
#include "robustq/normal.hpp"

namespace robustq {

namespace {

void require_probability(double p, const char* where) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError(std::string(where) + ": p outside [0,1]");
}

}  // namespace

LognormalKernel::LognormalKernel(double r, double theta, double T)
    : r_(r), theta_(theta), T_(T) {
    if (!std::isfinite(r) || !std::isfinite(theta) || !std::isfinite(T))
        throw DomainError("LognormalKernel: parameters must be finite");
    if (theta == 0.0) throw DomainError("LognormalKernel: theta must be non-zero");
    if (!(T > 0.0)) throw DomainError("LognormalKernel: maturity must be positive");
    mu_log_ = -(r + 0.5 * theta * theta) * T;
    sigma_log_ = std::abs(theta) * std::sqrt(T);
}

double LognormalKernel::quantile(double p) const {
    require_probability(p, "kernel_quantile");
    if (p == 0.0) return 0.0;
    if (p == 1.0) throw RangeError("kernel_quantile: Q_rho(1) = +inf");
    return std::exp(mu_log_ + sigma_log_ * normal::quantile(p));
}

double LognormalKernel::quantile_complement(double p) const {
    require_probability(p, "kernel_quantile_complement");
    if (p == 1.0) return 0.0;
    if (p == 0.0) throw RangeError("kernel_quantile_complement: Q_rho(1) = +inf");
    return std::exp(mu_log_ - sigma_log_ * normal::quantile(p));
}

double LognormalKernel::quantile_derivative(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("kernel quantile derivative: p outside (0,1)");
    const double z = normal::quantile(p);
    return sigma_log_ * std::exp(mu_log_ + sigma_log_ * z) / normal::pdf(z);
}

double LognormalKernel::cdf(double z) const {
    if (!(z > 0.0)) throw DomainError("kernel_cdf: z must be positive");
    return normal::cdf((std::log(z) - mu_log_) / sigma_log_);
}

double LognormalKernel::survival(double z) const {
    if (!(z > 0.0)) throw DomainError("kernel_survival: z must be positive");
    return normal::cdf(-(std::log(z) - mu_log_) / sigma_log_);
}

double LognormalKernel::mean() const { return std::exp(-r_ * T_); }

double LognormalKernel::partial_mean(double q) const {
    require_probability(q, "partial_mean");
    if (q == 0.0) return 0.0;
    if (q == 1.0) return mean();
    return mean() * normal::cdf(normal::quantile(q) - sigma_log_);
}

double LognormalKernel::upper_partial_mean(double p) const {
    require_probability(p, "upper_partial_mean");
    if (p == 0.0) return 0.0;
    if (p == 1.0) return mean();
    // Phi^{-1}(1-p) = -Phi^{-1}(p); E[rho; rho > Q_rho(1-p)] = mean * Phi(sigma - Phi^{-1}(1-p)).
    return mean() * normal::cdf(sigma_log_ + normal::quantile(p));
}

DiscreteDistribution::DiscreteDistribution(std::vector<std::pair<double, double>> atoms) {
    if (atoms.empty()) throw InvariantViolation("DiscreteDistribution: no atoms");
    std::sort(atoms.begin(), atoms.end());
    double total = 0.0;
    for (const auto& [v, pr] : atoms) {
        if (!std::isfinite(v)) throw InvariantViolation("DiscreteDistribution: non-finite atom");
        if (!(pr > 0.0)) throw InvariantViolation("DiscreteDistribution: probabilities must be positive");
        if (!values_.empty() && values_.back() == v) {
            probs_.back() += pr;
        } else {
            values_.push_back(v);
            probs_.push_back(pr);
        }
        total += pr;
    }
    if (std::abs(total - 1.0) > 1e-12) throw InvariantViolation("DiscreteDistribution: probabilities must sum to 1");
    cumulative_.resize(probs_.size());
    std::partial_sum(probs_.begin(), probs_.end(), cumulative_.begin());
    cumulative_.back() = 1.0;
}

DiscreteDistribution DiscreteDistribution::uniform_atoms(const std::vector<double>& values) {
    std::vector<std::pair<double, double>> atoms;
    atoms.reserve(values.size());
    const double w = 1.0 / static_cast<double>(values.size());
    for (double v : values) atoms.emplace_back(v, w);
    DiscreteDistribution d(std::move(atoms));
    // Breakpoints exactly at k/n so step boundaries do not drift with summation order.
    const double n = static_cast<double>(values.size());
    double count = 0.0;
    for (std::size_t k = 0; k < d.probs_.size(); ++k) {
        count += std::round(d.probs_[k] * n);
        d.cumulative_[k] = count / n;
    }
    return d;
}

double DiscreteDistribution::quantile(double p) const {
    require_probability(p, "discrete quantile");
    if (p == 1.0) return values_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), p);
    return values_[static_cast<std::size_t>(it - cumulative_.begin())];
}

Claim::Claim(UniformClaim c) : model_(c) {
    if (!(c.y > 0.0) || !std::isfinite(c.y)) throw DomainError("UniformClaim: y must be positive");
}

Claim::Claim(TruncatedNormalClaim c) : model_(c) {
    if (!(c.sigma > 0.0)) throw DomainError("TruncatedNormalClaim: sigma must be positive");
    if (!(c.a < c.b) || !std::isfinite(c.a) || !std::isfinite(c.b))
        throw DomainError("TruncatedNormalClaim: need finite a < b");
    cdf_a_ = normal::cdf((c.a - c.mu) / c.sigma);
    cdf_b_ = normal::cdf((c.b - c.mu) / c.sigma);
    if (!(cdf_b_ > cdf_a_)) throw DomainError("TruncatedNormalClaim: truncation interval has no mass");
}

Claim::Claim(ConstantClaim c) : model_(c) {
    if (!std::isfinite(c.value)) throw DomainError("ConstantClaim: value must be finite");
}

Claim::Claim(DiscreteDistribution c) : model_(std::move(c)) {}

double Claim::quantile(double p) const {
    require_probability(p, "claim_quantile");
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, UniformClaim>) {
                return m.y * p;
            } else if constexpr (std::is_same_v<T, ConstantClaim>) {
                return m.value;
            } else if constexpr (std::is_same_v<T, DiscreteDistribution>) {
                return m.quantile(p);
            } else {
                if (p == 0.0) return m.a;
                if (p == 1.0) return m.b;
                // Bisection on the truncated CDF; the bracket [a, b] always contains the root.
                const double mass = cdf_b_ - cdf_a_;
                double lo = m.a;
                double hi = m.b;
                for (int iter = 0; iter < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(lo)); ++iter) {
                    const double mid = 0.5 * (lo + hi);
                    const double f = (normal::cdf((mid - m.mu) / m.sigma) - cdf_a_) / mass;
                    if (f < p) lo = mid;
                    else hi = mid;
                }
                return 0.5 * (lo + hi);
            }
        },
        model_);
}

double Claim::quantile_derivative(double p) const {
    require_probability(p, "claim_quantile_derivative");
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, UniformClaim>) {
                return m.y;
            } else if constexpr (std::is_same_v<T, ConstantClaim>) {
                return 0.0;
            } else if constexpr (std::is_same_v<T, DiscreteDistribution>) {
                throw UnsupportedOperation("claim quantile derivative: discrete claim has no derivative");
            } else {
                const double q = quantile(p);
                return (cdf_b_ - cdf_a_) * m.sigma / normal::pdf((q - m.mu) / m.sigma);
            }
        },
        model_);
}

bool Claim::differentiable() const { return !std::holds_alternative<DiscreteDistribution>(model_); }

}  // namespace robustq
