#include <doctest.h>

#include <cmath>

#include "robustq/errors.hpp"
#include "robustq/utility.hpp"
#include "support/oracles.hpp"

using namespace robustq;

TEST_CASE("utility values") {
    CHECK(UtilitySpec({1.0}, {1.0}).u(0.0) == -1.0);
    CHECK(UtilitySpec({0.5, 0.5}, {1.0, 2.0}).u(0.0) == -1.0);
    const UtilitySpec base({950.0, 950.0}, {0.010, 0.012});
    const long double ref = -950.0L * (std::exp(-0.0766L) + std::exp(-0.09192L));
    CHECK(base.u(7.66) == doctest::Approx(static_cast<double>(ref)).epsilon(1e-14));
}

TEST_CASE("utility derivatives") {
    const UtilitySpec one({1.0}, {1.0});
    CHECK(one.derivative(0.0, 1) == 1.0);
    CHECK(one.derivative(0.0, 2) == -1.0);

    const UtilitySpec mix({0.7, 1.9}, {0.4, 1.3});
    for (double x = -10.0; x <= 50.0; x += 2.5) {
        const double fd1 = oracles::central_difference([&](double y) { return mix.u(y); }, x);
        CHECK(mix.derivative(x, 1) == doctest::Approx(fd1).epsilon(1e-6));
        for (int k = 2; k <= 4; ++k) {
            const double fd = oracles::central_difference([&](double y) { return mix.derivative(y, k - 1); }, x);
            CHECK(mix.derivative(x, k) == doctest::Approx(fd).epsilon(1e-5));
        }
        CHECK(mix.derivative(x, 1) > 0.0);
        CHECK(mix.derivative(x, 2) < 0.0);
        CHECK(mix.u(x) < 0.0);
    }
}

TEST_CASE("utility limits and overflow guard") {
    const UtilitySpec mix({0.7, 1.9}, {0.4, 1.3});
    const double far = 1e3 / 0.4;
    CHECK(mix.derivative(far, 1) < 1e-100);
    CHECK(mix.derivative(-far / 10.0, 1) > 1e100);
    const auto big = mix.u_checked(-1e4);
    CHECK(big.overflow);
    CHECK(std::isinf(big.value));
    CHECK(big.value < 0.0);
    CHECK_FALSE(mix.u_checked(1.0).overflow);
    CHECK(mix.log_abs_derivative(-1e4, 1) == doctest::Approx(std::log(1.9 * 1.3) + 1.3e4).epsilon(1e-12));
}

TEST_CASE("utility validation") {
    CHECK_THROWS_AS(UtilitySpec({1.0}, {1.0, 2.0}), DomainError);
    CHECK_THROWS_AS(UtilitySpec({-1.0}, {1.0}), DomainError);
    CHECK_THROWS_AS(UtilitySpec({1.0}, {0.0}), DomainError);
    CHECK_THROWS_AS(UtilitySpec({}, {}), DomainError);
}
