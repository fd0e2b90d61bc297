#include <doctest.h>

#include <cmath>
#include <random>

#include "robustq/errors.hpp"
#include "robustq/robust_objective.hpp"
#include "support/oracles.hpp"

using namespace robustq;

namespace {

RobustObjective base_objective(double alpha = 0.25) {
    return RobustObjective(alpha, Claim(UniformClaim{2.0}), UtilitySpec({950.0, 950.0}, {0.010, 0.012}));
}

}  // namespace

TEST_CASE("V reductions") {
    const UtilitySpec u({0.7, 1.9}, {0.4, 1.3});
    const RobustObjective worst(0.0, Claim(UniformClaim{2.0}), u);
    CHECK(worst.V(0.8, 0.3) == doctest::Approx(u.u(0.8 + 0.6)).epsilon(1e-15));
    const RobustObjective best(1.0, Claim(UniformClaim{2.0}), u);
    CHECK(best.V(0.0, 0.25) == doctest::Approx(u.u(1.5)).epsilon(1e-15));
    const RobustObjective half(0.5, Claim(TruncatedNormalClaim{1.0, 0.5, 0.0, 2.0}), u);
    CHECK(half.V(0.3, 0.5) == doctest::Approx(u.u(0.3 + half.claim().quantile(0.5))).epsilon(1e-14));
    CHECK_THROWS_AS(RobustObjective(1.5, Claim(UniformClaim{2.0}), u), DomainError);
}

TEST_CASE("V bounds on x >= 0") {
    const auto obj = base_objective();
    const double lower = obj.utility().u(0.0);
    const double bound = obj.marginal_bound();
    for (double x : {0.0, 0.5, 3.0, 20.0, 400.0}) {
        for (double p : {0.01, 0.3, 0.5, 0.9, 0.999}) {
            CHECK(obj.V(x, p) >= lower);
            CHECK(obj.V(x, p) < 0.0);
            CHECK(obj.V_x(x, p) > 0.0);
            CHECK(obj.V_x(x, p) <= bound);
            CHECK(obj.V_x(x, p, 2) < 0.0);
        }
    }
}

TEST_CASE("V_x against finite differences") {
    const RobustObjective single(0.0, Claim(ConstantClaim{0.0}), UtilitySpec({1.0}, {1.0}));
    CHECK(single.V_x(0.7, 0.4) == doctest::Approx(std::exp(-0.7)).epsilon(1e-15));
    const auto obj = base_objective();
    for (double x : {0.0, 3.0, 7.66}) {
        for (double p : {0.1, 0.6}) {
            const double fd = oracles::central_difference([&](double y) { return obj.V(y, p); }, x);
            CHECK(obj.V_x(x, p) == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("S_inverse") {
    const double g = 0.8;
    const RobustObjective single(0.0, Claim(UniformClaim{2.0}), UtilitySpec({1.0}, {g}));
    for (double w : {1e-3, 0.2, 0.8, 5.0})
        for (double p : {0.1, 0.5, 0.9})
            CHECK(single.S_inverse(w, p) == doctest::Approx(-std::log(w / g) / g - 2.0 * p).epsilon(1e-12));

    const RobustObjective obj(0.25, Claim(UniformClaim{2.0}), UtilitySpec({0.7, 1.9}, {0.4, 1.3}));
    const double xi = obj.S_inverse(0.5, 0.3);
    double lo = -100.0;
    double hi = 100.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (obj.V_x(mid, 0.3) > 0.5) lo = mid;
        else hi = mid;
    }
    CHECK(xi == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-12));

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> lw(-8.0, 4.0), up(0.001, 0.999);
    const auto base = base_objective();
    for (int k = 0; k < 200; ++k) {
        const double w = std::exp(lw(rng));
        const double p = up(rng);
        CHECK(base.V_x(base.S_inverse(w, p), p) == doctest::Approx(w).epsilon(1e-10));
        CHECK(base.S_inverse(w * 1.01, p) < base.S_inverse(w, p));
    }
    CHECK_THROWS_AS(base.S_inverse(0.0, 0.5), DomainError);
    CHECK_THROWS_AS(base.S_inverse(-1.0, 0.5), DomainError);
}

TEST_CASE("L operator") {
    const RobustObjective flat(0.4, Claim(ConstantClaim{1.0}), UtilitySpec({0.7, 1.9}, {0.4, 1.3}));
    CHECK(flat.L_operator(0.3, 0.2) == 0.0);

    const RobustObjective single(0.0, Claim(UniformClaim{2.0}), UtilitySpec({1.0}, {0.8}));
    for (double p : {0.2, 0.7}) {
        const double xi = single.S_inverse(0.5, p);
        const double fd = oracles::central_difference([&](double q) { return single.V_x(xi, q); }, p);
        CHECK(single.L_operator(0.5, p) == doctest::Approx(fd).epsilon(1e-6));
        CHECK(single.L_operator(0.5, p) == doctest::Approx(-0.8 * 0.5 * 2.0).epsilon(1e-12));
    }

    const RobustObjective half(0.5, Claim(UniformClaim{2.0}), UtilitySpec({1.0}, {0.8}));
    const double xi = half.S_inverse(0.5, 0.5);
    const double up = 0.5 * half.utility().derivative(xi + 1.0, 2) * 2.0;
    CHECK(half.L_operator(0.5, 0.5) == doctest::Approx(up - up).epsilon(1e-15));

    const RobustObjective disc(0.3, Claim(DiscreteDistribution::uniform_atoms({0.0, 1.0})), UtilitySpec({1.0}, {1.0}));
    CHECK_THROWS_AS(disc.L_operator(0.5, 0.5), UnsupportedOperation);
}

TEST_CASE("J_alpha") {
    const UtilitySpec u({0.7, 1.9}, {0.4, 1.3});
    const RobustObjective zero(0.3, Claim(ConstantClaim{0.0}), u);
    std::vector<double> grid;
    for (int i = 0; i <= 100; ++i) grid.push_back(1e-6 + i * (1 - 2e-6) / 100);
    CHECK(zero.J_alpha(GridQuantile(grid, std::vector<double>(grid.size(), 1.3))) ==
          doctest::Approx(u.u(1.3) * (1 - 2e-6)).epsilon(1e-12));

    const auto obj = base_objective();
    std::vector<double> q1, q2, mid;
    for (double p : grid) {
        q1.push_back(5.0 * p);
        q2.push_back(3.0 + p * p);
        mid.push_back(0.5 * (5.0 * p + 3.0 + p * p));
    }
    const double j1 = obj.J_alpha(GridQuantile(grid, q1));
    const double j2 = obj.J_alpha(GridQuantile(grid, q2));
    const double jm = obj.J_alpha(GridQuantile(grid, mid));
    CHECK(j1 < 0.0);
    CHECK(jm > 0.5 * (j1 + j2));
    std::vector<double> bumped = q1;
    for (std::size_t i = 40; i < 60; ++i) bumped[i] += 0.1;
    for (std::size_t i = 60; i < bumped.size(); ++i) bumped[i] = std::max(bumped[i], bumped[59]);
    CHECK(obj.J_alpha(GridQuantile(grid, bumped)) > j1);

    std::vector<double> bad = q1;
    bad[10] = bad[9] - 0.5;
    CHECK_THROWS_AS(GridQuantile(grid, bad), InvariantViolation);
    std::vector<double> neg(grid.size(), -1.0);
    CHECK_THROWS_AS(GridQuantile(grid, neg), InvariantViolation);
}

TEST_CASE("J_alpha on step quantiles against direct summation") {
    const UtilitySpec u({0.7, 1.9}, {0.4, 1.3});
    const std::vector<double> claim_atoms{0.2, 1.1, 0.6, 1.9};
    const RobustObjective obj(0.35, Claim(DiscreteDistribution::uniform_atoms(claim_atoms)), u);
    const std::vector<double> wealth{0.5, 0.1, 2.0, 1.2};
    std::vector<double> x = wealth, y = claim_atoms;
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    double worst = 0.0, best = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        worst += u.u(x[i] + y[i]) / 4.0;
        best += u.u(x[i] + y[3 - i]) / 4.0;
    }
    CHECK(obj.J_alpha(GridQuantile::from_atoms(wealth)) == doctest::Approx(0.65 * worst + 0.35 * best).epsilon(1e-13));
}
