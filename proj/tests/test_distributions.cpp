#include <doctest.h>

#include <cmath>

#include "robustq/distributions.hpp"
#include "robustq/errors.hpp"
#include "robustq/normal.hpp"
#include "support/oracles.hpp"

using namespace robustq;

TEST_CASE("normal quantile agrees with erfc bisection") {
    for (double p : {1e-12, 1e-8, 1e-6, 1e-3, 0.02425, 0.1, 0.3, 0.5, 0.7, 0.9, 0.97575, 0.999, 1 - 1e-6, 1 - 1e-9}) {
        const double ref = oracles::normal_quantile(p);
        CHECK(normal::quantile(p) == doctest::Approx(ref).epsilon(1e-12));
    }
    CHECK(normal::quantile(0.5) == 0.0);
    CHECK(std::isinf(normal::quantile(0.0)));
    CHECK_THROWS_AS(normal::quantile(1.5), DomainError);
}

TEST_CASE("kernel quantile values") {
    const LognormalKernel k(0.02, 0.4, 1.0);
    CHECK(k.quantile(0.5) == doctest::Approx(std::exp(-0.10)).epsilon(1e-15));
    CHECK(k.quantile(0.5) == doctest::Approx(0.904837).epsilon(1e-6));
    CHECK(k.quantile(0.975) == doctest::Approx(std::exp(-0.10 + 0.4 * oracles::normal_quantile(0.975))).epsilon(1e-13));
    CHECK(k.quantile(1e-300) == doctest::Approx(oracles::lognormal_quantile(0.02, 0.4, 1.0, 1e-300)).epsilon(1e-12));
    CHECK(k.quantile(1e-300) < 1e-6);
    CHECK(k.quantile(0.0) == 0.0);
    CHECK_THROWS_AS(k.quantile(1.0), RangeError);
    CHECK_THROWS_AS(k.quantile(-0.1), DomainError);
    CHECK_THROWS_AS(k.quantile(1.1), DomainError);
}

TEST_CASE("kernel cdf inverts the quantile") {
    const LognormalKernel k(0.02, 0.25, 1.0);
    CHECK(k.cdf(k.quantile(0.3)) == doctest::Approx(0.3).epsilon(1e-10));
    CHECK(k.cdf(std::exp(k.mu_log())) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(k.cdf(1.0) == doctest::Approx(oracles::normal_cdf(0.05125 / 0.25)).epsilon(1e-14));
    for (int i = 0; i <= 1000; ++i) {
        const double p = 1e-6 + i * (1.0 - 2e-6) / 1000.0;
        CHECK(std::abs(k.cdf(k.quantile(p)) - p) <= 1e-10);
        CHECK(k.survival(k.quantile(p)) == doctest::Approx(1.0 - p).epsilon(1e-9));
    }
    CHECK_THROWS_AS(k.cdf(0.0), DomainError);
    CHECK_THROWS_AS(k.cdf(-1.0), DomainError);
}

TEST_CASE("kernel mean and partial means") {
    const LognormalKernel k(0.02, 0.25, 1.0);
    CHECK(k.mean() == doctest::Approx(std::exp(-0.02)));
    CHECK(k.mean() == doctest::Approx(0.980199).epsilon(1e-6));
    CHECK(LognormalKernel(0.0, 0.7, 1.0).mean() == 1.0);

    // Midpoint rule on 1e5 cells against the mean.
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += k.quantile((i + 0.5) / n);
    CHECK(std::abs(sum / n - k.mean()) < 1e-6);

    for (double q : {0.01, 0.3, 0.5, 0.9, 0.999}) {
        const double ref = oracles::adaptive_simpson([&](double s) { return oracles::lognormal_quantile(0.02, 0.25, 1.0, s); },
                                                     0.0, q, 1e-13);
        CHECK(k.partial_mean(q) == doctest::Approx(ref).epsilon(1e-9));
        CHECK(k.upper_partial_mean(1.0 - q) == doctest::Approx(k.mean() - ref).epsilon(1e-9));
    }
}

TEST_CASE("kernel construction checks") {
    CHECK_THROWS_AS(LognormalKernel(0.02, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(LognormalKernel(0.02, 0.25, 0.0), DomainError);
    const LognormalKernel neg(0.02, -0.25, 1.0);
    CHECK(neg.sigma_log() == 0.25);
}

TEST_CASE("uniform claim") {
    const Claim c(UniformClaim{2.0});
    CHECK(c.quantile(0.5) == 1.0);
    CHECK(c.quantile(0.0) == 0.0);
    CHECK(c.quantile(1.0) == 2.0);
    CHECK(c.quantile_derivative(0.3) == 2.0);
    CHECK(c.quantile(0.7) - c.quantile(0.2) == doctest::Approx(2.0 * 0.5).epsilon(1e-15));
    CHECK_THROWS_AS(c.quantile(1.5), DomainError);
    CHECK_THROWS_AS(c.quantile(-0.5), DomainError);
}

TEST_CASE("truncated normal claim") {
    const Claim c(TruncatedNormalClaim{1.0, 0.5, 0.0, 2.0});
    CHECK(c.quantile(0.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(c.quantile(1e-12) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(c.quantile(1.0) == doctest::Approx(2.0));
    CHECK(c.quantile(0.5) == doctest::Approx(1.0).epsilon(1e-12));
    for (double p : {0.05, 0.2, 0.5, 0.77, 0.95})
        CHECK(c.quantile(p) == doctest::Approx(oracles::truncated_normal_quantile(1.0, 0.5, 0.0, 2.0, p)).epsilon(1e-10));
    const Claim skew(TruncatedNormalClaim{0.3, 0.8, -0.5, 3.0});
    for (double p : {0.1, 0.4, 0.9}) {
        CHECK(skew.quantile(p) ==
              doctest::Approx(oracles::truncated_normal_quantile(0.3, 0.8, -0.5, 3.0, p)).epsilon(1e-10));
        const double fd = oracles::central_difference([&](double q) { return skew.quantile(q); }, p, 1e-6);
        CHECK(skew.quantile_derivative(p) == doctest::Approx(fd).epsilon(1e-5));
    }
    double prev = -1.0;
    for (int i = 0; i <= 200; ++i) {
        const double v = skew.quantile(i / 200.0);
        CHECK(v >= prev);
        CHECK(v >= -0.5);
        CHECK(v <= 3.0);
        prev = v;
    }
}

TEST_CASE("constant claim") {
    const Claim c(ConstantClaim{1.5});
    CHECK(c.quantile(0.1) == 1.5);
    CHECK(c.quantile_derivative(0.4) == 0.0);
    CHECK(c.differentiable());
}

TEST_CASE("discrete distribution") {
    const DiscreteDistribution d({{3.0, 0.25}, {1.0, 0.5}, {2.0, 0.25}});
    CHECK(d.values() == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(d.quantile(0.0) == 1.0);
    CHECK(d.quantile(0.49) == 1.0);
    CHECK(d.quantile(0.5) == 2.0);  // right-continuous
    CHECK(d.quantile(0.75) == 3.0);
    CHECK(d.quantile(1.0) == 3.0);
    CHECK_THROWS_AS(DiscreteDistribution({{1.0, 0.5}, {2.0, 0.4}}), InvariantViolation);
    CHECK_THROWS_AS(DiscreteDistribution({{1.0, 0.0}, {2.0, 1.0}}), InvariantViolation);

    const auto u = DiscreteDistribution::uniform_atoms({0.4, 0.1, 0.7});
    CHECK(u.cumulative()[0] == 1.0 / 3.0);
    CHECK(u.cumulative()[1] == 2.0 / 3.0);
    CHECK(u.cumulative()[2] == 1.0);

    const Claim c(u);
    CHECK_FALSE(c.differentiable());
    CHECK_THROWS_AS(c.quantile_derivative(0.5), UnsupportedOperation);
    CHECK(c.quantile(0.2) == 0.1);
}
