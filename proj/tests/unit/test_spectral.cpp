#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "branchlab/bmc.hpp"
#include "branchlab/repro/mutation.hpp"
#include "branchlab/spaces.hpp"
#include "branchlab/spectral.hpp"

using namespace branchlab;

namespace {

ExpectationKernel dense_kernel(const std::vector<std::vector<double>>& m) {
    return ExpectationKernel([m](StateIndex x, std::vector<KernelEntry>& out) {
        if (x.id >= m.size()) return;
        const auto& row = m[x.id];
        for (std::size_t y = 0; y < row.size(); ++y) {
            if (row[y] > 0.0) out.push_back({StateIndex{y}, row[y]});
        }
    });
}

double eigen_spectral_radius(const std::vector<std::vector<double>>& m) {
    const auto n = static_cast<Eigen::Index>(m.size());
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return Eigen::EigenSolver<Eigen::MatrixXd>(a, false).eigenvalues().cwiseAbs().maxCoeff();
}

ExpectationKernel brw_on_z(double mean) {
    const OffspringLaw law({{1, 2.0 - mean}, {2, mean - 1.0}}, lattice::nearest_neighbour_walk(1));
    return expectation_kernel(BmcSpec::uniform(law));
}

}  // namespace

TEST_SUITE("spectral") {
    TEST_CASE("dense Perron examples") {
        CHECK(dense_perron({{2.0}}).rho == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(dense_perron({{0.0, 1.0}, {1.0, 0.0}}).rho == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(dense_perron({{1.0, 1.0}, {1.0, 1.0}}).rho == doctest::Approx(2.0).epsilon(1e-12));
        CHECK_THROWS_AS(dense_perron({{1.0, 1.0}, {0.0, 1.0}}), ValidationError);
    }

    TEST_CASE("Perron root of a 6x6 matrix against an Eigen oracle") {
        RandomSource rng(31);
        std::vector<std::vector<double>> m(6, std::vector<double>(6));
        for (auto& row : m)
            for (auto& w : row) w = rng.uniform() < 0.5 ? 0.0 : rng.uniform();
        for (std::size_t i = 0; i < 6; ++i) m[i][(i + 1) % 6] += 0.5;
        const auto result = dense_perron(m);
        CHECK(std::abs(result.rho - eigen_spectral_radius(m)) < 1e-10 * result.rho);
        CHECK(result.lower <= result.rho);
        CHECK(result.rho <= result.upper);
        for (double v : result.vector) CHECK(v > 0.0);
    }

    TEST_CASE("truncation of a single self-looping state") {
        const auto kernel = dense_kernel({{1.7}});
        const auto sweep = spectral_radius_truncation(kernel, StateIndex{0}, {1, 2});
        REQUIRE(sweep.estimates.size() == 2);
        CHECK(sweep.estimates[0].value == doctest::Approx(1.7).epsilon(1e-12));
        CHECK(sweep.lower_bound == doctest::Approx(1.7).epsilon(1e-12));
    }

    TEST_CASE("truncations of a BRW on Z increase toward the mean") {
        const auto sweep = spectral_radius_truncation(brw_on_z(1.3), lattice::encode({0}), {2, 4, 8, 16});
        REQUIRE(sweep.estimates.size() == 4);
        for (std::size_t i = 1; i < sweep.estimates.size(); ++i) {
            CHECK(sweep.estimates[i].value >= sweep.estimates[i - 1].value - 1e-12);
        }
        CHECK(sweep.estimates.back().value < 1.3);
        // Dirichlet walk on 2L+1 sites: 1.3 cos(pi / (2L + 2)).
        const double exact = 1.3 * std::cos(M_PI / 34.0);
        CHECK(sweep.estimates.back().value == doctest::Approx(exact).epsilon(1e-9));
    }

    TEST_CASE("layered mutation truncations are nilpotent") {
        const auto kernel = expectation_kernel(repro::mutation_spec());
        const auto root = repro::mutation_state(0, repro::MutationPath::main);
        const auto sweep = spectral_radius_truncation(kernel, root, {3});
        CHECK(sweep.estimates.empty());
        CHECK_FALSE(sweep.warnings.empty());
        const auto trunc = Truncation::breadth_first(kernel, root, 3);
        std::vector<std::vector<double>> dense(trunc.size(), std::vector<double>(trunc.size(), 0.0));
        const auto& mat = trunc.matrix();
        for (std::size_t i = 0; i < mat.n; ++i)
            for (std::size_t k = mat.offsets[i]; k < mat.offsets[i + 1]; ++k) dense[i][mat.cols[k]] = mat.weights[k];
        CHECK(eigen_spectral_radius(dense) == doctest::Approx(0.0));
    }

    TEST_CASE("growth estimate examples") {
        const auto doubling = expectation_kernel(BmcSpec::uniform(OffspringLaw::deterministic(2)));
        const auto est = rho_double_prime_growth(doubling, StateIndex{0}, 20);
        CHECK(est.value == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(est.lower == doctest::Approx(2.0).epsilon(1e-12));
        const auto brw = rho_double_prime_growth(brw_on_z(1.3), lattice::encode({0}), 40);
        CHECK(brw.value == doctest::Approx(1.3).epsilon(1e-12));
    }

    TEST_CASE("test-function certificates") {
        const auto kernel = brw_on_z(1.3);
        const auto trunc = Truncation::breadth_first(kernel, lattice::encode({0}), 6);
        PerronResult perron_result;
        const auto u = perron_test_function(trunc, lattice::encode({0}), &perron_result);
        const double rate = certifiable_rate(kernel, u);
        CHECK(rate == doctest::Approx(perron_result.rho).epsilon(1e-10));
        const auto good = certify_rho_prime(kernel, u, rate, trunc.states());
        CHECK(good.valid);
        CHECK(good.margin >= 0.0);
        const auto bad = certify_rho_prime(kernel, u, 1.3, trunc.states());
        CHECK_FALSE(bad.valid);
        CHECK(bad.margin < 0.0);
        TestFunction out_of_range{{lattice::encode({0}), 1.5}};
        CHECK_THROWS_AS(certify_rho_prime(kernel, out_of_range, 1.0, {}), ValidationError);
    }

    TEST_CASE("reversible criterion on Z and on a single state") {
        const auto report = reversible_criterion_check(brw_on_z(1.3), lattice::encode({0}), 64);
        CHECK(report.ratio_defined);
        CHECK(report.hypotheses_hold);
        CHECK(report.agree);
        const auto single = reversible_criterion_check(dense_kernel({{1.5}}), StateIndex{0}, 10);
        CHECK(single.hypotheses_hold);
        CHECK(single.rho_truncation == doctest::Approx(1.5).epsilon(1e-12));
        CHECK(single.rho_growth == doctest::Approx(1.5).epsilon(1e-12));
    }

    TEST_CASE("reversible criterion rejects the one-way mutation chain") {
        const auto report = reversible_criterion_check(expectation_kernel(repro::mutation_spec()),
                                                       repro::mutation_state(0, repro::MutationPath::main), 8);
        CHECK_FALSE(report.ratio_defined);
        CHECK_FALSE(report.hypotheses_hold);
        CHECK_FALSE(report.violation.empty());
    }
}
