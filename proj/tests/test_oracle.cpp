#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "robustq/budget.hpp"
#include "robustq/errors.hpp"
#include "robustq/oracle.hpp"
#include "support/oracles.hpp"

using namespace robustq;
using namespace robustq::oracle;

namespace {

const LognormalKernel kKernel(0.02, 0.25, 1.0);

std::vector<double> draw(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = d(rng);
    return v;
}

double sorted_pairing(std::vector<double> x, std::vector<double> y, bool reversed) {
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    if (reversed) std::reverse(y.begin(), y.end());
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s / static_cast<double>(x.size());
}

// Least-squares distance to the closest non-decreasing sequence, over all block partitions.
double isotonic_brute_force(const std::vector<double>& v) {
    const std::size_t n = v.size();
    double best = std::numeric_limits<double>::infinity();
    for (unsigned mask = 0; mask < (1u << (n - 1)); ++mask) {
        std::vector<double> fit(n);
        std::size_t start = 0;
        bool sorted = true;
        double last = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (i + 1 == n || (mask >> i) & 1u) {
                double mean = 0.0;
                for (std::size_t k = start; k <= i; ++k) mean += v[k];
                mean /= static_cast<double>(i + 1 - start);
                for (std::size_t k = start; k <= i; ++k) fit[k] = mean;
                sorted = sorted && mean >= last;
                last = mean;
                start = i + 1;
            }
        }
        if (!sorted) continue;
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i) d += (fit[i] - v[i]) * (fit[i] - v[i]);
        best = std::min(best, d);
    }
    return best;
}

}  // namespace

TEST_CASE("rearrangement of two atoms") {
    const auto r = rearrangement_extremes({1.0, 2.0}, {0.0, 1.0});
    CHECK(r.max == 1.0);
    CHECK(r.min == 0.5);
    CHECK(r.pairings == 2);
}

TEST_CASE("constant atoms make the pairing irrelevant") {
    const auto r = rearrangement_extremes({3.0, 3.0, 3.0}, {0.5, 1.0, 4.5});
    CHECK(r.max == doctest::Approx(3.0 * 2.0).epsilon(1e-15));
    CHECK(r.min == r.max);
}

TEST_CASE("enumerated extremes equal the sorted pairings") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 10; ++rep) {
        const auto x = draw(rng, 5, -2.0, 3.0);
        const auto y = draw(rng, 5, -1.0, 1.0);
        const auto r = rearrangement_extremes(x, y);
        CHECK(r.pairings == 120);
        CHECK(r.max == r.sorted_max);
        CHECK(r.min == r.anti_min);
        CHECK(r.max == doctest::Approx(sorted_pairing(x, y, false)).epsilon(1e-14));
        CHECK(r.min == doctest::Approx(sorted_pairing(x, y, true)).epsilon(1e-14));
    }
}

TEST_CASE("coupling extremes") {
    SUBCASE("worst case is comonotone for alpha = 0") {
        const RobustObjective obj(0.0, Claim(DiscreteDistribution::uniform_atoms({0.0, 1.0})), UtilitySpec({1.0}, {1.0}));
        const auto c = coupling_J_alpha(obj, {0.5, 2.0});
        CHECK(c.couplings == 2);
        CHECK(c.worst == c.comonotone);
        CHECK(c.best == c.anti_comonotone);
        CHECK(c.J == c.worst);
    }
    SUBCASE("degenerate claim") {
        const RobustObjective obj(0.4, Claim(DiscreteDistribution::uniform_atoms({1.0, 1.0, 1.0})),
                                  UtilitySpec({1.0, 2.0}, {0.5, 1.5}));
        const auto c = coupling_J_alpha(obj, {0.1, 0.7, 2.0});
        CHECK(c.worst == c.best);
    }
    SUBCASE("enumeration equals the quantile integral") {
        std::mt19937_64 rng(9);
        for (int rep = 0; rep < 3; ++rep) {
            const double alpha = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            const auto y = draw(rng, 6, 0.0, 2.0);
            auto q = draw(rng, 6, 0.0, 3.0);
            std::sort(q.begin(), q.end());
            const RobustObjective obj(alpha, Claim(DiscreteDistribution::uniform_atoms(y)),
                                      UtilitySpec({1.0, 2.0}, {0.8, 1.7}));
            const auto c = coupling_J_alpha(obj, q);
            CHECK(c.couplings == 720);
            CHECK(c.worst <= c.best);
            CHECK(std::abs(c.J - obj.J_alpha(GridQuantile::from_atoms(q))) <= 1e-10);
        }
    }
    SUBCASE("claim atoms must match") {
        const RobustObjective obj(0.4, Claim(UniformClaim{1.0}), UtilitySpec({1.0}, {1.0}));
        CHECK_THROWS(coupling_J_alpha(obj, {0.1, 0.7}));
    }
}

TEST_CASE("pool adjacent violators") {
    CHECK(pava_project({2.0, 1.0}) == std::vector<double>{1.5, 1.5});
    const std::vector<double> sorted{-1.0, 0.0, 0.0, 2.5};
    CHECK(pava_project(sorted) == sorted);
    CHECK(pava_project({3.0, 1.0}, {1.0, 3.0}) == std::vector<double>{1.5, 1.5});

    std::mt19937_64 rng(3);
    const auto v = draw(rng, 100, -1.0, 1.0);
    const auto proj = pava_project(v);
    CHECK(std::is_sorted(proj.begin(), proj.end()));
    CHECK(pava_project(proj) == proj);
    for (std::size_t start = 0; start + 6 <= v.size(); start += 13) {
        const std::vector<double> prefix(v.begin() + start, v.begin() + start + 6);
        const auto small = pava_project(prefix);
        double d = 0.0;
        for (std::size_t i = 0; i < 6; ++i) d += (small[i] - prefix[i]) * (small[i] - prefix[i]);
        CHECK(d == doctest::Approx(isotonic_brute_force(prefix)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(pava_project({1.0, 2.0}, {1.0}), SizeError);
}

TEST_CASE("direct solve against the closed form") {
    const double gamma = 1.0;
    const RobustObjective obj(0.3, Claim(ConstantClaim{0.0}), UtilitySpec({1.0}, {gamma}));
    const double x = 1.0;
    const DirectSolution d = direct_solve({&obj, &kKernel, x, 500});
    CHECK(d.budget == doctest::Approx(x).epsilon(1e-8));
    const double lambda = oracles::bisect_decreasing(
        [&](double l) { return oracles::closed_form_budget_analytic(gamma, l, 0.02, 0.25, 1.0); }, x, 1e-12, 1e6);
    CHECK(d.lambda == doctest::Approx(lambda).epsilon(1e-2));
    double sup = 0.0;
    for (std::size_t i = 0; i < d.p.size(); ++i)
        sup = std::max(sup, std::abs(d.Q[i] - oracles::closed_form_quantile(gamma, lambda, 0.02, 0.25, 1.0, d.p[i])));
    CHECK(sup < 1e-3);
}

TEST_CASE("direct solve vanishes with the budget") {
    const RobustObjective obj(0.25, Claim(UniformClaim{2.0}), UtilitySpec({950.0, 950.0}, {0.010, 0.012}));
    double prev = std::numeric_limits<double>::infinity();
    for (double x : {1e-2, 1e-4, 1e-6}) {
        const DirectSolution d = direct_solve({&obj, &kKernel, x, 200});
        const double top = *std::max_element(d.Q.begin(), d.Q.end());
        CHECK(top < prev);
        prev = top;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("direct solve agrees with the variational solver") {
    const RobustObjective obj(0.25, Claim(UniformClaim{2.0}), UtilitySpec({950.0, 950.0}, {0.010, 0.012}));
    const double x = 7.66;
    const BudgetSolution vi = lambda_of_x(obj, kKernel, x);
    const DirectSolution d = direct_solve({&obj, &kKernel, x, 500});
    const double vi_obj = obj.J_alpha(GridQuantile(vi.result.grid.p(), vi.result.Q));
    CHECK(std::abs(vi_obj - d.objective) <= 1e-3 * std::abs(d.objective));
    double sup = 0.0;
    for (std::size_t i = 0; i < d.p.size(); ++i) {
        if (d.p[i] < vi.result.pbar + 0.01 || d.p[i] > 0.99) continue;
        sup = std::max(sup, std::abs(reconstruct_quantile(vi.result, obj, kKernel, d.p[i]) - d.Q[i]));
    }
    CHECK(sup <= 1e-2);
}

TEST_CASE("oracle size limits") {
    const std::vector<double> nine(9, 1.0);
    CHECK_THROWS_AS(rearrangement_extremes(nine, nine), SizeError);
    CHECK_THROWS_AS(rearrangement_extremes({1.0, 2.0}, {1.0}), SizeError);
    const RobustObjective obj(0.4, Claim(DiscreteDistribution::uniform_atoms(nine)), UtilitySpec({1.0}, {1.0}));
    CHECK_THROWS_AS(coupling_J_alpha(obj, nine), SizeError);
}
