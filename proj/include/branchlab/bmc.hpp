#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "branchlab/estimate.hpp"
#include "branchlab/kernel.hpp"
#include "branchlab/offspring.hpp"
#include "branchlab/random.hpp"
#include "branchlab/trace.hpp"

namespace branchlab {

/// Discrete-time branching Markov chain: an offspring law (with optional
/// displacement) for every state of a countable space.
struct BmcSpec {
    using LawFactory = std::function<std::shared_ptr<const OffspringLaw>(StateIndex)>;

    LawFactory law;

    /// Same law at every state.
    static BmcSpec uniform(OffspringLaw law);
};

/// Expectation kernel of a BmcSpec: m(x, .) = sum_n p_n(x) E[placements of n children].
ExpectationKernel expectation_kernel(const BmcSpec& spec);

/// E_start[N_n] by n exact sparse kernel products. Throws TruncationOverflow when
/// more than `cap` states are reachable.
double expected_counts(const BmcSpec& spec, StateIndex start, int n, std::size_t cap = 1u << 22);

/// Particle counts per occupied state.
using Occupation = std::map<StateIndex, std::uint64_t>;

struct BmcRun {
    PopulationTrace trace;
    Occupation final_particles;
};

/// One realization of N_0..N_k, stopping at the horizon, at extinction, or once N >= cap.
BmcRun simulate(const BmcSpec& spec, StateIndex start, int horizon, std::uint64_t cap, RandomSource& rng);

struct BmcSurvival {
    McEstimate survival;
    std::uint64_t cap_hits = 0;
    /// q^cap with q the extinction probability of the start state's law taken as a
    /// single-type process; bounds the chance that a capped replica later dies out.
    std::optional<double> cap_bias_bound;
};

/// Fraction of replicas alive at the horizon or stopped at the cap. Replica i uses
/// rng.replica(i).
BmcSurvival survival_probability_mc(const BmcSpec& spec, StateIndex start, int horizon, std::uint64_t cap,
                                    std::uint64_t replicas, const RandomSource& rng, int threads = 0);

/// Population traces of independent replicas, replica i from rng.replica(i).
std::vector<PopulationTrace> simulate_replicas(const BmcSpec& spec, StateIndex start, int horizon, std::uint64_t cap,
                                               std::uint64_t replicas, const RandomSource& rng, int threads = 0);

}  // namespace branchlab
