#include <doctest.h>

#include <cmath>

#include "branchlab/gw.hpp"

using namespace branchlab;

TEST_SUITE("gw") {
    TEST_CASE("extinction probability examples") {
        CHECK(extinction_probability(OffspringLaw({{0, 0.5}, {2, 0.5}})) == 1.0);
        CHECK(extinction_probability(OffspringLaw::deterministic(2)) == 0.0);
        const double q = extinction_probability(OffspringLaw({{0, 0.25}, {2, 0.75}}));
        // Smaller root of (3/4) q^2 - q + 1/4 by bisection.
        double lo = 0.0, hi = 0.5;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            (0.75 * mid * mid - mid + 0.25 > 0.0 ? lo : hi) = mid;
        }
        CHECK(std::abs(q - lo) < 1e-10);
    }

    TEST_CASE("classification matches the mean") {
        CHECK(classify(OffspringLaw({{0, 0.6}, {2, 0.4}})).regime == GwRegime::subcritical);
        CHECK(classify(OffspringLaw({{0, 0.5}, {2, 0.5}})).regime == GwRegime::critical);
        const auto sup = classify(OffspringLaw({{0, 0.25}, {2, 0.75}}));
        CHECK(sup.regime == GwRegime::supercritical);
        CHECK(sup.mean == doctest::Approx(1.5));
        CHECK(sup.extinction_prob < 1.0);
    }

    TEST_CASE("extinction is 1 exactly when the mean is at most 1") {
        RandomSource rng(11);
        for (int trial = 0; trial < 200; ++trial) {
            const double p0 = rng.uniform(), p1 = rng.uniform() * (1.0 - p0);
            const double p3 = 1.0 - p0 - p1;
            if (p1 > 1.0 - 1e-9) continue;
            const OffspringLaw law({{0, p0}, {1, p1}, {3, p3}});
            const double q = extinction_probability(law);
            if (law.mean() <= 1.0) {
                CHECK(q == 1.0);
            } else {
                CHECK(q < 1.0);
            }
        }
    }

    TEST_CASE("monotone iteration from zero stays in [0, 1] and increases") {
        const auto it = extinction_iterates(OffspringLaw({{0, 0.3}, {1, 0.2}, {4, 0.5}}), 200);
        CHECK(it.front() == 0.0);
        for (std::size_t k = 1; k < it.size(); ++k) {
            CHECK(it[k] >= it[k - 1]);
            CHECK(it[k] <= 1.0);
        }
    }

    TEST_CASE("near-critical law flags non-convergence and reports an Aitken estimate") {
        const OffspringLaw law({{0, 0.5 - 1e-9}, {2, 0.5 + 1e-9}});
        const auto s = solve_extinction(law);
        CHECK_FALSE(s.converged);
        CHECK(s.aitken >= s.probability);
        CHECK_THROWS_AS(extinction_probability_checked(law), ConvergenceError);
    }
}
