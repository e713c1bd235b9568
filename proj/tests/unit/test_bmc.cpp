#include <doctest.h>

#include <cmath>

#include "branchlab/bmc.hpp"
#include "branchlab/gw.hpp"
#include "branchlab/repro/mutation.hpp"
#include "branchlab/spaces.hpp"

using namespace branchlab;

namespace {

/// Random n-state chain: law i has mean mean[i] and children jump by row jump[i].
struct SmallChain {
    std::vector<std::vector<double>> jump;
    std::vector<OffspringLaw> laws;
    BmcSpec spec;

    SmallChain(int n, RandomSource& rng) {
        jump.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
        for (auto& row : jump) {
            double total = 0.0;
            for (auto& w : row) total += (w = rng.uniform());
            for (auto& w : row) w /= total;
        }
        auto rows = jump;
        auto walk = std::make_shared<IndependentJumps>([rows](StateIndex x, std::vector<KernelEntry>& out) {
            const auto& r = rows[static_cast<std::size_t>(x.id)];
            for (std::size_t y = 0; y < r.size(); ++y) out.push_back({StateIndex{y}, r[y]});
        });
        std::vector<std::shared_ptr<const OffspringLaw>> per_state;
        for (int i = 0; i < n; ++i) {
            const double p2 = 0.3 + 0.5 * rng.uniform();
            const double p0 = (1.0 - p2) * rng.uniform();
            per_state.push_back(std::make_shared<const OffspringLaw>(
                std::vector<OffspringLaw::Outcome>{{0, p0}, {1, 1.0 - p0 - p2}, {2, p2}}, walk));
            laws.push_back(*per_state.back());
        }
        spec.law = [per_state](StateIndex s) { return per_state[static_cast<std::size_t>(s.id)]; };
    }

    /// Dense m = diag(mean) P.
    std::vector<std::vector<double>> dense() const {
        auto m = jump;
        for (std::size_t i = 0; i < m.size(); ++i) {
            for (auto& w : m[i]) w *= laws[i].mean();
        }
        return m;
    }
};

std::vector<std::vector<double>> multiply(const std::vector<std::vector<double>>& a,
                                          const std::vector<std::vector<double>>& b) {
    const std::size_t n = a.size();
    std::vector<std::vector<double>> c(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
    return c;
}

}  // namespace

TEST_SUITE("bmc") {
    TEST_CASE("expected counts for deterministic doubling") {
        CHECK(expected_counts(BmcSpec::uniform(OffspringLaw::deterministic(2)), StateIndex{0}, 10) == 1024.0);
    }

    TEST_CASE("expected counts on the mutation chain at n = 4") {
        const double a4 = expected_counts(repro::mutation_spec(), repro::mutation_state(0, repro::MutationPath::main), 4);
        CHECK(a4 >= 16.0);
        CHECK(a4 == 32.0);
    }

    TEST_CASE("expected counts match a dense matrix power") {
        RandomSource rng(21);
        const SmallChain chain(5, rng);
        const auto m = chain.dense();
        auto power = m;
        for (int k = 1; k < 6; ++k) power = multiply(power, m);
        for (std::uint64_t x = 0; x < 5; ++x) {
            double oracle = 0.0;
            for (double w : power[x]) oracle += w;
            CHECK(expected_counts(chain.spec, StateIndex{x}, 6) == doctest::Approx(oracle).epsilon(1e-12));
        }
    }

    TEST_CASE("semigroup property of expected counts") {
        RandomSource rng(22);
        const SmallChain chain(4, rng);
        const auto m = chain.dense();
        auto m3 = multiply(multiply(m, m), m);
        const double lhs = expected_counts(chain.spec, StateIndex{0}, 5);
        double rhs = 0.0;
        for (std::uint64_t y = 0; y < 4; ++y) rhs += m3[0][y] * expected_counts(chain.spec, StateIndex{y}, 2);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }

    TEST_CASE("truncation overflow when the reachable set exceeds the cap") {
        const OffspringLaw law({{2, 1.0}}, lattice::nearest_neighbour_walk(2));
        CHECK_THROWS_AS(expected_counts(BmcSpec::uniform(law), lattice::encode({0, 0}), 20, 100), TruncationOverflow);
    }

    TEST_CASE("simulate terminators") {
        RandomSource rng(23);
        const auto dead = simulate(BmcSpec::uniform(OffspringLaw::deterministic(0)), StateIndex{0}, 10, 100, rng);
        CHECK(dead.trace.counts == std::vector<std::uint64_t>{1, 0});
        CHECK(dead.trace.terminator == Terminator::extinct);
        const auto capped = simulate(BmcSpec::uniform(OffspringLaw::deterministic(2)), StateIndex{0}, 100, 1000, rng);
        CHECK(capped.trace.terminator == Terminator::cap_hit);
        CHECK(capped.trace.times.back() == 10.0);
        CHECK(capped.trace.final_count() == 1024);
    }

    TEST_CASE("traces are absorbed at zero") {
        const OffspringLaw law({{0, 0.4}, {2, 0.6}}, lattice::nearest_neighbour_walk(1));
        const auto traces = simulate_replicas(BmcSpec::uniform(law), lattice::encode({0}), 40, 10000, 300,
                                              RandomSource(24));
        for (const auto& t : traces) {
            bool zero = false;
            for (auto c : t.counts) {
                if (zero) CHECK(c == 0);
                zero = zero || c == 0;
            }
        }
    }

    TEST_CASE("survival estimates") {
        const RandomSource rng(25);
        const auto killed = survival_probability_mc(BmcSpec::uniform(OffspringLaw::deterministic(0)), StateIndex{0}, 10,
                                                    100, 1000, rng);
        CHECK(killed.survival.estimate == 0.0);
        CHECK(killed.survival.standard_error == 0.0);
        const auto doubling = survival_probability_mc(BmcSpec::uniform(OffspringLaw::deterministic(2)), StateIndex{0},
                                                      20, 1u << 16, 1000, rng);
        CHECK(doubling.survival.estimate == 1.0);
        const OffspringLaw law({{0, 0.25}, {2, 0.75}});
        const auto s = survival_probability_mc(BmcSpec::uniform(law), StateIndex{0}, 200, 1u << 16, 20000, rng);
        const double target = 1.0 - extinction_probability(law);
        CHECK(std::abs(s.survival.estimate - target) <= 4.0 * std::sqrt(target * (1 - target) / 20000));
        REQUIRE(s.cap_bias_bound.has_value());
        CHECK(*s.cap_bias_bound < 1e-100);
    }

    TEST_CASE("Monte Carlo mean of N_n within 5 sigma of the exact expectation") {
        RandomSource rng(26);
        const SmallChain chain(5, rng);
        const int n = 8, replicas = 4000;
        std::vector<double> finals(replicas);
        for (int i = 0; i < replicas; ++i) {
            auto local = RandomSource(27).replica(static_cast<std::uint64_t>(i));
            const auto run = simulate(chain.spec, StateIndex{0}, n, 1u << 30, local);
            finals[static_cast<std::size_t>(i)] =
                run.trace.times.back() == n ? static_cast<double>(run.trace.final_count()) : 0.0;
        }
        const auto est = sample_mean(finals);
        CHECK(std::abs(est.estimate - expected_counts(chain.spec, StateIndex{0}, n)) <= 5.0 * est.standard_error);
    }

    TEST_CASE("more offspring mass never lowers survival beyond noise") {
        const RandomSource rng(28);
        const auto walk = lattice::nearest_neighbour_walk(1);
        const auto weak = survival_probability_mc(BmcSpec::uniform(OffspringLaw({{0, 0.4}, {2, 0.6}}, walk)),
                                                  lattice::encode({0}), 60, 4096, 5000, rng);
        const auto strong = survival_probability_mc(BmcSpec::uniform(OffspringLaw({{0, 0.3}, {2, 0.7}}, walk)),
                                                    lattice::encode({0}), 60, 4096, 5000, rng);
        CHECK(strong.survival.estimate >= weak.survival.estimate - 3.0 * weak.survival.standard_error);
    }

    TEST_CASE("lattice encoding round trips") {
        for (std::int64_t x : {-5, 0, 7}) {
            for (std::int64_t y : {-1000, 3}) {
                CHECK(lattice::decode(lattice::encode({x, y}), 2) == std::vector<std::int64_t>{x, y});
            }
        }
    }
}
