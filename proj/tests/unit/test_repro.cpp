#include <doctest.h>

#include <cmath>

#include "branchlab/bmc.hpp"
#include "branchlab/repro/criticality.hpp"
#include "branchlab/repro/intervals.hpp"
#include "branchlab/repro/mutation.hpp"

using namespace branchlab;
using namespace branchlab::repro;

TEST_SUITE("repro") {
    TEST_CASE("mutation state packing") {
        for (std::uint64_t t : {0u, 1u, 17u, 256u}) {
            for (auto path : {MutationPath::main, MutationPath::side}) {
                const auto s = mutation_state(t, path);
                CHECK(mutation_time(s) == t);
                CHECK(mutation_path(s) == path);
            }
        }
        CHECK(is_power_of_four(1));
        CHECK(is_power_of_four(64));
        CHECK_FALSE(is_power_of_four(0));
        CHECK_FALSE(is_power_of_four(8));
    }

    TEST_CASE("mutation expected counts") {
        const auto counts = mutation_expected_counts(64);
        CHECK(counts[0] == 1);
        CHECK(counts[1] == 4);
        for (int k = 1; k <= 3; ++k) {
            const auto t = static_cast<std::size_t>(1) << (2 * k);
            CHECK(counts[t] == cpp_rational(pow(cpp_int(2), static_cast<unsigned>(t + 1))));
        }
    }

    TEST_CASE("exact recursion agrees with the generic sparse propagation") {
        const auto counts = mutation_expected_counts(64);
        const auto spec = mutation_spec();
        const auto root = mutation_state(0, MutationPath::main);
        for (int n = 0; n <= 3; ++n) {
            CHECK(expected_counts(spec, root, n) == static_cast<double>(counts[static_cast<std::size_t>(n)]));
        }
        for (int n : {8, 16, 33, 64}) {
            const double exact = static_cast<double>(counts[static_cast<std::size_t>(n)]);
            CHECK(std::abs(expected_counts(spec, root, n) - exact) <= 1e-13 * exact);
        }
    }

    TEST_CASE("growth window stays between 2 and 4") {
        const auto w = mutation_growth(64);
        CHECK(w.first == 32);
        CHECK(w.last == 64);
        CHECK(w.window_min >= 2.0);
        CHECK(w.window_max <= 4.0);
        CHECK(w.window_min <= w.window_max);
        CHECK_THROWS_AS(mutation_growth(4), ValidationError);
    }

    TEST_CASE("survival to horizon 4 is positive") {
        const auto report = mutation_survival_mc({4}, 2000, RandomSource(71));
        REQUIRE(report.horizons.size() == 1);
        CHECK(report.horizons[0].survival.estimate > 0.0);
        CHECK(report.horizons[0].frequency.estimate > 0.0);
        CHECK(report.worst_switch_ratio <= 1.0);
        CHECK(report.worst_population_ratio <= 1.0);
        CHECK_THROWS_AS(mutation_survival_mc({5}, 10, RandomSource(71)), ValidationError);
        CHECK_THROWS_AS(mutation_survival_mc({16, 4}, 10, RandomSource(71)), ValidationError);
    }

    TEST_CASE("interval construction") {
        const auto c = IntervalConstruction::build(4);
        CHECK(c.S[0] == 0);
        CHECK(c.S[1] == 2);
        CHECK(c.a[1] == 1);
        CHECK(c.a[2] == 8);
        CHECK(c.S[2] == 18);
        for (int n = 1; n <= 4; ++n) CHECK(c.S[static_cast<std::size_t>(n)] == s_closed_form(n));
        CHECK(c.sign_at(cpp_rational(-1)) == 0);
        CHECK(c.sign_at(cpp_rational(1, 2)) == 1);
        CHECK(c.sign_at(cpp_rational(3, 2)) == -1);
        CHECK(c.sign_at(cpp_rational(2)) == 1);
        CHECK(c.integral_to(cpp_rational(2)) == 0);
        CHECK(c.integral_to(cpp_rational(10)) == 8);
        CHECK(c.integral_to(cpp_rational(18)) == 0);
    }

    TEST_CASE("time averages and the rescaled set") {
        for (int n = 1; n <= 6; ++n) {
            const auto avg = interval_time_averages(n);
            CHECK(avg.at_s == 0);
            CHECK(avg.at_s_plus_a == cpp_rational(4, 5));
        }
        CHECK(rescaled_set_measure(1) == cpp_rational(4, 9));
        CHECK(rescaled_set_measure(2) == cpp_rational(4, 9) + cpp_rational(4, 81));
    }

    TEST_CASE("deterministic Feynman-Kac values") {
        const RandomSource rng(72);
        CHECK(counterexample_fk_mc(0.0, 0.0, 2, false, 1, rng).log_estimate == 0.0);
        CHECK(counterexample_fk_mc(0.0, 0.0, 1, true, 1, rng).log_estimate == 8.0);
        CHECK(counterexample_fk_mc(0.0, -0.5, 1, true, 1, rng).log_estimate == doctest::Approx(3.0));
        CHECK_THROWS_AS(counterexample_fk_mc(0.1, 0.0, 4, true, 10, rng), ValidationError);
    }

    TEST_CASE("criticality modes") {
        for (auto mode : {CriticalityMode::branching_g, CriticalityMode::killing_g,
                          CriticalityMode::branching_g_minus_eps, CriticalityMode::killing_g_plus_eps}) {
            CHECK(parse_criticality_mode(to_string(mode)) == mode);
        }
        CHECK_THROWS_AS(parse_criticality_mode("sideways"), ValidationError);
        CHECK_THROWS_AS(criticality_example_mc(CriticalityMode::branching_g, {50}, 10, RandomSource(73)),
                        ValidationError);
        const auto branch = criticality_branch(CriticalityMode::branching_g, 0.1);
        CHECK(branch.rate(4.0) == doctest::Approx(0.5));
        CHECK(branch.rate(0.5) == 0.0);
        CHECK(branch.mean_offspring(4.0) == doctest::Approx(2.0));
    }
}
