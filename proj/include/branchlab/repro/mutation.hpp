#pragma once

#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "branchlab/bmc.hpp"
#include "branchlab/estimate.hpp"

namespace branchlab::repro {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

/// Layered branching chain where every particle has 4 children per step. At
/// times t = 4^k each main-path particle stays on the main path with
/// probability 8^-t, taking its children along, and otherwise sends them into a
/// side path whose particles are killed on reaching the next power of 4.
/// States are (time, path) pairs.
enum class MutationPath : std::uint64_t { main = 0, side = 1 };

bool is_power_of_four(std::uint64_t t);
StateIndex mutation_state(std::uint64_t time, MutationPath path);
std::uint64_t mutation_time(StateIndex s);
MutationPath mutation_path(StateIndex s);

/// The chain as a BmcSpec started from mutation_state(0, main).
BmcSpec mutation_spec();

/// Exact E[N_n] for n = 0..n_max from the (main, side) expectation recursion.
/// Requires n_max <= 4^6.
std::vector<cpp_rational> mutation_expected_counts(int n_max);

/// log2 of a positive rational, to double precision.
double log2_of(const cpp_rational& q);

struct GrowthWindow {
    std::vector<double> roots;  ///< a_n^(1/n), n >= 1 (roots[0] unused)
    int first = 0, last = 0;
    double window_min = 0.0, window_max = 0.0;
    int argmin = 0, argmax = 0;
};

/// a_n^(1/n) over [n_max/2, n_max] from the exact counts.
GrowthWindow mutation_growth(int n_max);

struct MutationHorizon {
    std::uint64_t horizon = 0;
    /// Sequential importance estimate of P(N_horizon > 0): every switch is forced
    /// to keep a main-path particle and the path weight is multiplied by the
    /// probability of that event.
    McEstimate survival;
    /// Plain survival frequency of independently simulated replicas.
    McEstimate frequency;
};

struct MutationSurvivalReport {
    std::vector<MutationHorizon> horizons;
    /// Largest P(some child takes the main path at t) / 2^-t over switch times
    /// t >= 1 met by any replica; at most 1.
    double worst_switch_ratio = 0.0;
    /// Largest N_t / 4^t seen; at most 1.
    double worst_population_ratio = 0.0;
};

/// Survival at each horizon (powers of 4, ascending). All horizons share one set
/// of replica paths, replica i from rng.replica(i).
MutationSurvivalReport mutation_survival_mc(const std::vector<std::uint64_t>& horizons, std::uint64_t replicas,
                                            const RandomSource& rng, int threads = 0);

}  // namespace branchlab::repro
