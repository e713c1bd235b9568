#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <map>
#include <stdexcept>

#include "branchlab/offspring.hpp"
#include "branchlab/random.hpp"
#include "branchlab/trace.hpp"
#include "branchlab/types.hpp"

using namespace branchlab;

namespace {

OffspringLaw random_law(RandomSource& rng) {
    std::vector<OffspringLaw::Outcome> out;
    double total = 0.0;
    for (std::uint32_t n = 0; n < 5; ++n) {
        const double w = rng.uniform();
        out.push_back({n, w});
        total += w;
    }
    for (auto& o : out) o.prob /= total;
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < out.size(); ++i) sum += out[i].prob;
    out.back().prob = 1.0 - sum;
    return OffspringLaw(out);
}

}  // namespace

TEST_SUITE("core") {
    TEST_CASE("sample_offspring places children at the parent without a displacement") {
        RandomSource rng(1);
        CHECK(sample_offspring(OffspringLaw::deterministic(1), StateIndex{5}, rng) ==
              std::vector<StateIndex>{StateIndex{5}});
        CHECK(sample_offspring(OffspringLaw::deterministic(0), StateIndex{5}, rng).empty());
    }

    TEST_CASE("empirical child-count mean within 3 sigma") {
        const OffspringLaw law({{0, 0.25}, {2, 0.75}});
        RandomSource rng(2);
        const int draws = 1000000;
        double sum = 0.0;
        for (int i = 0; i < draws; ++i) sum += static_cast<double>(law.sample_count(rng));
        // Var N = E N^2 - (E N)^2 = 3 - 2.25.
        const double sigma = std::sqrt(0.75 / draws);
        CHECK(std::abs(sum / draws - 1.5) <= 3.0 * sigma);
    }

    TEST_CASE("chi-square goodness of fit below the 0.999 quantile") {
        const OffspringLaw law({{0, 0.1}, {1, 0.2}, {2, 0.3}, {3, 0.25}, {5, 0.15}});
        RandomSource rng(3);
        const int draws = 1000000;
        std::map<std::uint32_t, double> seen;
        for (int i = 0; i < draws; ++i) seen[law.sample_count(rng)] += 1.0;
        double stat = 0.0;
        for (const auto& o : law.outcomes()) {
            const double expected = o.prob * draws;
            stat += (seen[o.count] - expected) * (seen[o.count] - expected) / expected;
        }
        const boost::math::chi_squared dist(static_cast<double>(law.outcomes().size() - 1));
        CHECK(stat < boost::math::quantile(dist, 0.999));
    }

    TEST_CASE("generating_value examples") {
        CHECK(generating_value(OffspringLaw::deterministic(2), 0.5) == doctest::Approx(0.25).epsilon(1e-15));
        RandomSource rng(4);
        CHECK(generating_value(random_law(rng), 1.0) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(generating_value(OffspringLaw({{0, 0.25}, {2, 0.75}}), 1.0 / 3.0) ==
              doctest::Approx(1.0 / 3.0).epsilon(1e-14));
        CHECK_THROWS_AS(generating_value(OffspringLaw::deterministic(2), 1.5), std::domain_error);
        CHECK_THROWS_AS(generating_value(OffspringLaw::deterministic(2), -0.1), std::domain_error);
    }

    TEST_CASE("generating_value is nondecreasing and convex on random laws") {
        RandomSource rng(5);
        for (int trial = 0; trial < 20; ++trial) {
            const auto law = random_law(rng);
            std::vector<double> f;
            for (int i = 0; i <= 100; ++i) f.push_back(generating_value(law, i / 100.0));
            for (std::size_t i = 1; i < f.size(); ++i) CHECK(f[i] >= f[i - 1]);
            for (std::size_t i = 1; i + 1 < f.size(); ++i) CHECK(f[i + 1] - 2.0 * f[i] + f[i - 1] >= -1e-15);
        }
    }

    TEST_CASE("law validation and renormalization") {
        CHECK_THROWS_AS(OffspringLaw({{0, -0.1}, {2, 1.1}}), ValidationError);
        CHECK_THROWS_AS(OffspringLaw({{0, 0.5}, {2, 0.4}}), ValidationError);
        CHECK_THROWS_AS(OffspringLaw({{2, 0.5}, {2, 0.5}}), ValidationError);
        const OffspringLaw nearly({{0, 0.3}, {2, 0.7 + 5e-13}});
        double total = 0.0;
        for (const auto& o : nearly.outcomes()) total += o.prob;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(nearly.mean() == doctest::Approx(1.4));
    }

    TEST_CASE("random source reproduces draws per (seed, stream)") {
        RandomSource a(7, 3), b(7, 3), c(7, 4);
        bool same = true, differs = false;
        for (int i = 0; i < 1000; ++i) {
            const auto x = a(), y = b(), z = c();
            same = same && x == y;
            differs = differs || x != z;
        }
        CHECK(same);
        CHECK(differs);
        CHECK(RandomSource(7).replica(9)() == RandomSource(7).replica(9)());
        CHECK(std::isinf(RandomSource(1).exponential(0.0)));
    }

    TEST_CASE("uniform draws have the right moments") {
        RandomSource rng(8);
        const int n = 200000;
        double s = 0.0, s2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double z = rng.normal();
            s += z;
            s2 += z * z;
        }
        CHECK(std::abs(s / n) < 5.0 / std::sqrt(n));
        CHECK(std::abs(s2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
    }

    TEST_CASE("binomial conditioned on at least one") {
        RandomSource rng(9);
        const double n = 1e30, p = 1e-30;  // mean 1
        double s = 0.0;
        const int draws = 100000;
        for (int i = 0; i < draws; ++i) {
            const double k = rng.binomial_small_mean(n, p, 1);
            CHECK(k >= 1.0);
            s += k;
        }
        // Poisson(1) given >= 1 has mean 1 / (1 - e^-1).
        const double mean = 1.0 / (1.0 - std::exp(-1.0));
        CHECK(std::abs(s / draws - mean) < 0.02);
    }
}
