#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "branchlab/bmp.hpp"
#include "branchlab/fkpp.hpp"

using namespace branchlab;

namespace {

FkppProblem binary_on(double right, int cells, double rate = 1.0) {
    FkppProblem p;
    p.grid = Grid1D(0.0, right, cells);
    p.branch = BranchField::binary(rate);
    return p;
}

}  // namespace

TEST_SUITE("fkpp") {
    TEST_CASE("nonlinearity examples") {
        const auto p = binary_on(1.0, 16);
        CHECK(nonlinearity(p, 0.0, 0.5) == 0.0);
        CHECK(nonlinearity(p, 1.0, 0.5) == 0.0);
        CHECK(nonlinearity(p, 0.5, 0.5) == doctest::Approx(0.25));
        CHECK_THROWS_AS(nonlinearity(p, 1.5, 0.5), std::domain_error);
        CHECK_THROWS_AS(nonlinearity(p, -0.1, 0.5), std::domain_error);
        FkppProblem death = p;
        death.branch = BranchField(2.0, OffspringLaw::deterministic(0));
        CHECK(nonlinearity(death, 0.3, 0.5) == doctest::Approx(-0.6));
    }

    TEST_CASE("zero data stays zero") {
        auto p = binary_on(4.0, 100);
        const auto sol = solve_parabolic(p, 1.0, 0.01);
        for (double v : sol.fields.back()) CHECK(v == 0.0);
    }

    TEST_CASE("reflecting box with flat data follows the logistic ODE") {
        auto p = binary_on(2.0, 50);
        p.left = p.right = Boundary::reflecting;
        p.initial = 0.3;
        const auto sol = solve_parabolic(p, 2.0, 0.005);
        const double exact = 1.0 / (1.0 + (1.0 / 0.3 - 1.0) * std::exp(-2.0));
        for (double v : sol.fields.back()) CHECK(std::abs(v - exact) < 1e-5);
        CHECK(sol.max_clamp <= kClampTolerance);
    }

    TEST_CASE("heat flow of the first sine mode") {
        auto p = binary_on(std::numbers::pi, 400, 0.0);
        p.initial = ScalarField([](double x) { return std::sin(x); }, 0.0, 1.0);
        const auto sol = solve_parabolic(p, 1.0, 0.005, {0.5});
        REQUIRE(sol.times.size() == 2);
        const double mid = interpolate(p.grid, sol.fields.back(), std::numbers::pi / 2);
        CHECK(std::abs(mid - std::exp(-0.5)) < 1e-4);
        const double early = interpolate(p.grid, sol.fields.front(), std::numbers::pi / 2);
        CHECK(std::abs(early - std::exp(-0.25)) < 1e-4);
    }

    TEST_CASE("parabolic solver rejects an oversized step") {
        auto p = binary_on(1.0, 16, 5.0);
        CHECK_THROWS_AS(solve_parabolic(p, 1.0, 0.1), ValidationError);
    }

    TEST_CASE("stationary dichotomy across interval lengths") {
        const double critical = std::numbers::pi / std::numbers::sqrt2;
        for (double length : {1.5, 2.0, 2.5, 3.0, 6.0}) {
            const auto result = stationary_monotone(binary_on(length, static_cast<int>(100 * length)));
            CHECK(result.degenerate == (length < critical));
            CHECK((result.linear_growth > 0.0) == (length > critical));
            if (!result.degenerate) CHECK(result.residual < 1e-6);
        }
    }

    TEST_CASE("minimal stationary solution lies below the long-time limit") {
        auto p = binary_on(4.0, 200);
        const auto low = stationary_monotone(p);
        const auto high = maximal_stationary_via_longtime(p, 100.0, 0.01);
        CHECK(high.settled);
        REQUIRE(low.field.size() == high.field.size());
        for (std::size_t i = 0; i < low.field.size(); ++i) CHECK(low.field[i] <= high.field[i] + 1e-8);
    }

    TEST_CASE("long-time limit equals BBM survival at five points") {
        auto p = binary_on(6.0, 300);
        const auto limit = maximal_stationary_via_longtime(p, 100.0, 0.01);
        BmpConfig cfg;
        cfg.horizon = 20.0;
        cfg.dt = 0.01;
        cfg.cap = 300;
        cfg.replicas = 2000;
        cfg.record_interval = 20.0;
        const auto motion = p.motion();
        int k = 0;
        for (double x0 : {0.5, 1.5, 3.0, 4.5, 5.5}) {
            const auto s = bmp_survival_mc(motion, p.branch, x0, cfg, RandomSource(61, static_cast<std::uint64_t>(k++)));
            const double pde = interpolate(p.grid, limit.field, x0);
            CHECK(std::abs(s.survival.estimate - pde) <= 4.0 * s.survival.standard_error);
        }
    }

    TEST_CASE("duality without branching is the killed heat semigroup") {
        auto p = binary_on(3.0, 300, 0.0);
        DualitySettings s;
        s.t = 0.5;
        s.replicas = 20000;
        s.points = 5;
        s.seed = 62;
        const auto reports = mckean_duality_check(p, {ScalarField(1.0), ScalarField::indicator(1.0, 2.0)}, s);
        REQUIRE(reports.size() == 2);
        for (const auto& r : reports) CHECK(r.max_standardized <= 4.0);
    }

    TEST_CASE("principal eigenvalue of the Dirichlet Laplacian with a constant shift") {
        for (double kappa : {0.0, 0.7, -1.2}) {
            const auto est = principal_eigenvalue_1d(binary_on(2.0, 200, 0.0), ScalarField(kappa));
            const double exact = kappa - std::numbers::pi * std::numbers::pi / 8.0;
            CHECK(std::abs(est.value - exact) < 1e-3);
        }
        const auto wide = principal_eigenvalue_1d(binary_on(1000.0, 4000, 0.0), ScalarField(0.4));
        CHECK(std::abs(wide.value - 0.4) < 1e-3);
    }
}
