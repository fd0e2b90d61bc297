#pragma once

#include <utility>
#include <variant>
#include <vector>

namespace robustq {

// Lognormal pricing kernel of a Black-Scholes market: log(rho) ~ N(mu_log, sigma_log^2)
// with mu_log = -(r + theta^2/2) T and sigma_log = |theta| sqrt(T).
class LognormalKernel {
public:
    LognormalKernel(double r, double theta, double T);

    double r() const { return r_; }
    double theta() const { return theta_; }
    double maturity() const { return T_; }
    double mu_log() const { return mu_log_; }
    double sigma_log() const { return sigma_log_; }

    // Q_rho(p). p = 0 gives 0; p = 1 throws RangeError; p outside [0,1] throws DomainError.
    double quantile(double p) const;
    // Q_rho(1 - p), evaluated without forming 1 - p.
    double quantile_complement(double p) const;
    double quantile_derivative(double p) const;

    // F_rho(z) for z > 0.
    double cdf(double z) const;
    // 1 - F_rho(z) for z > 0.
    double survival(double z) const;

    // E[rho] = exp(-rT).
    double mean() const;
    // int_0^q Q_rho(s) ds = E[rho; rho <= Q_rho(q)].
    double partial_mean(double q) const;
    // int_{1-p}^1 Q_rho(s) ds = int_0^p Q_rho(1-s) ds, the mass of the upper tail.
    double upper_partial_mean(double p) const;

private:
    double r_;
    double theta_;
    double T_;
    double mu_log_;
    double sigma_log_;
};

// Uniform claim on [0, y].
struct UniformClaim {
    double y;
};

// Normal(mu, sigma) truncated to [a, b].
struct TruncatedNormalClaim {
    double mu;
    double sigma;
    double a;
    double b;
};

// Degenerate claim equal to `value` almost surely.
struct ConstantClaim {
    double value;
};

// Finite atomic law; atoms are sorted and merged on construction.
class DiscreteDistribution {
public:
    explicit DiscreteDistribution(std::vector<std::pair<double, double>> atoms);
    // n atoms of probability 1/n each.
    static DiscreteDistribution uniform_atoms(const std::vector<double>& values);

    // Right-continuous quantile inf{z : F(z) > p}; p = 1 gives the largest atom.
    double quantile(double p) const;
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& probabilities() const { return probs_; }
    // Cumulative probabilities, last entry is exactly 1.
    const std::vector<double>& cumulative() const { return cumulative_; }

private:
    std::vector<double> values_;
    std::vector<double> probs_;
    std::vector<double> cumulative_;
};

// Quantile model of the intractable claim.
class Claim {
public:
    using Model = std::variant<UniformClaim, TruncatedNormalClaim, ConstantClaim, DiscreteDistribution>;

    Claim(UniformClaim c);
    Claim(TruncatedNormalClaim c);
    Claim(ConstantClaim c);
    Claim(DiscreteDistribution c);

    // Q_theta(p) for p in [0,1]; endpoints are the limits.
    double quantile(double p) const;
    // Q_theta'(p); throws UnsupportedOperation for discrete claims.
    double quantile_derivative(double p) const;
    bool differentiable() const;

    double lower() const { return quantile(0.0); }
    double upper() const { return quantile(1.0); }

    const Model& model() const { return model_; }

private:
    Model model_;
    // Truncated normal: Phi((a-mu)/sigma) and Phi((b-mu)/sigma).
    double cdf_a_ = 0.0;
    double cdf_b_ = 1.0;
};

}  // namespace robustq
