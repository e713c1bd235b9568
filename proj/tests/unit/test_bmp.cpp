#include <doctest.h>

#include <cmath>
#include <numbers>

#include "branchlab/bmp.hpp"
#include "branchlab/skeleton.hpp"

using namespace branchlab;

namespace {

BmpConfig config(double horizon, std::uint64_t replicas, double dt = 0.01) {
    BmpConfig cfg;
    cfg.horizon = horizon;
    cfg.replicas = replicas;
    cfg.dt = dt;
    cfg.cap = 1u << 24;
    return cfg;
}

}  // namespace

TEST_SUITE("bmp") {
    TEST_CASE("no branching keeps exactly one particle") {
        const auto motion = MotionSpec::brownian(Interval::whole_line());
        const auto mass = mass_mc(motion, BranchField::binary(0.0), 0.0, config(2.0, 200), RandomSource(41));
        CHECK(mass.estimate == 1.0);
        CHECK(mass.standard_error == 0.0);
        const auto alive = bmp_survival_mc(motion, BranchField::binary(0.0), 0.0, config(2.0, 200), RandomSource(41));
        CHECK(alive.survival.estimate == 1.0);
    }

    TEST_CASE("Yule mass at t = 5 within 5 sigma of e^5") {
        const auto motion = MotionSpec::brownian(Interval::whole_line());
        const auto mass = mass_mc(motion, BranchField::binary(1.0), 0.0, config(5.0, 4000, 0.05), RandomSource(42));
        CHECK(std::abs(mass.estimate - std::exp(5.0)) <= 5.0 * mass.standard_error);
    }

    TEST_CASE("mass_mc refuses capped replicas") {
        auto cfg = config(5.0, 10, 0.05);
        cfg.cap = 20;
        const auto motion = MotionSpec::brownian(Interval::whole_line());
        CHECK_THROWS_AS(mass_mc(motion, BranchField::binary(1.0), 0.0, cfg, RandomSource(43)), ValidationError);
    }

    TEST_CASE("PDE mass on the whole line is e^(r t)") {
        const auto motion = MotionSpec::brownian(Interval::whole_line());
        CHECK(std::abs(expected_mass_pde(motion, BranchField::binary(1.0), 0.0, 2.0) - std::exp(2.0)) < 1e-3);
    }

    TEST_CASE("Monte Carlo mass on (0, 3) agrees with the PDE") {
        const auto motion = MotionSpec::brownian(Interval::dirichlet(0.0, 3.0));
        const auto branch = BranchField::binary(1.0);
        for (double x0 : {0.5, 1.5}) {
            const auto mc = mass_mc(motion, branch, x0, config(1.0, 20000), RandomSource(44));
            const double pde = expected_mass_pde(motion, branch, x0, 1.0);
            CHECK(std::abs(mc.estimate - pde) <= 5.0 * mc.standard_error);
        }
    }

    TEST_CASE("critical interval has a flat growth slope") {
        const double length = std::numbers::pi / std::numbers::sqrt2;
        const auto motion = MotionSpec::brownian(Interval::dirichlet(0.0, length));
        const auto est = lambda_double_prime_estimate(motion, BranchField::binary(1.0), length / 2.0, 30.0);
        CHECK(std::abs(est.value) < 0.01);
        CHECK(est.lower <= est.value);
        CHECK(est.value <= est.upper);
    }

    TEST_CASE("Dirichlet mass grows with the domain") {
        const auto branch = BranchField::binary(1.0);
        double previous = 0.0;
        for (double right : {1.5, 2.0, 3.0, 5.0}) {
            const double m = expected_mass_pde(MotionSpec::brownian(Interval::dirichlet(0.0, right)), branch, 1.0, 2.0);
            CHECK(m >= previous);
            previous = m;
        }
        CHECK(previous < std::exp(2.0));
    }

    TEST_CASE("total mass of subcritical processes") {
        const auto motion = MotionSpec::brownian(Interval::whole_line());
        auto cfg = config(60.0, 20000, 0.05);
        cfg.record_interval = 60.0;
        const auto death = total_mass_estimate(motion, BranchField(1.0, OffspringLaw::deterministic(0)), 0.0, cfg,
                                               RandomSource(45));
        CHECK(std::abs(death.mass.estimate - 1.0) <= 5.0 * death.mass.standard_error);
        CHECK_FALSE(death.warning.has_value());
        const auto sub = total_mass_estimate(motion, BranchField(1.0, OffspringLaw({{0, 0.75}, {2, 0.25}})), 0.0, cfg,
                                             RandomSource(46));
        CHECK(std::abs(sub.mass.estimate - 2.0) <= 5.0 * sub.mass.standard_error);
    }

    TEST_CASE("censoring warning for a critical process over a short horizon") {
        const auto motion = MotionSpec::brownian(Interval::whole_line());
        const auto report = total_mass_estimate(motion, BranchField(1.0, OffspringLaw({{0, 0.5}, {2, 0.5}})), 0.0,
                                                config(2.0, 2000, 0.05), RandomSource(47));
        CHECK(report.censored > 20);
        CHECK(report.warning.has_value());
    }

    TEST_CASE("local survival of a single Brownian particle") {
        const auto motion = MotionSpec::brownian(Interval::whole_line());
        const auto est = local_survival_mc(motion, BranchField::binary(0.0), 0.0, -1.0, 1.0, config(1.0, 20000),
                                           RandomSource(48));
        const double exact = std::erf(1.0 / std::numbers::sqrt2);
        CHECK(std::abs(est.estimate - exact) <= 4.0 * est.standard_error);
    }

    TEST_CASE("binary skeleton has no truncation loss and stays below the process") {
        const auto branch = BranchField::binary(1.0);
        const auto skel = minorizing_skeleton(branch, 0.1);
        CHECK(skel.arity == 2);
        CHECK(skel.truncation_loss == 0.0);
        CHECK(skel.tail_mass <= skel.epsilon_prime * skel.mass_floor);
        const auto motion = MotionSpec::brownian(Interval::dirichlet(0.0, 4.0));
        auto cfg = config(3.0, 500);
        int checked = 0;
        for_each_replica(
            motion, branch, 2.0, cfg, RandomSource(49),
            [&](std::size_t, BmpRun&& run) {
                REQUIRE(run.skeleton_counts.size() == run.integer_counts.size());
                REQUIRE(run.skeleton_counts.front() == 1);
                for (std::size_t k = 0; k < run.skeleton_counts.size(); ++k) {
                    CHECK(run.skeleton_counts[k] <= run.integer_counts[k]);
                }
                ++checked;
            },
            &skel, 1);
        CHECK(checked == 500);
    }

    TEST_CASE("skeleton rejects epsilon outside (0, 1)") {
        CHECK_THROWS_AS(minorizing_skeleton(BranchField::binary(1.0), 0.0), ValidationError);
        CHECK_THROWS_AS(minorizing_skeleton(BranchField::binary(1.0), 1.0), ValidationError);
    }

    TEST_CASE("runs are reproducible per replica") {
        const auto motion = MotionSpec::brownian(Interval::dirichlet(0.0, 3.0));
        const auto branch = BranchField::binary(1.0);
        auto cfg = config(2.0, 1);
        auto a = RandomSource(50).replica(3);
        auto b = RandomSource(50).replica(3);
        const auto ra = simulate_bmp(motion, branch, 1.0, cfg, a);
        const auto rb = simulate_bmp(motion, branch, 1.0, cfg, b);
        CHECK(ra.trace == rb.trace);
        CHECK(ra.total_mass == rb.total_mass);
    }
}
