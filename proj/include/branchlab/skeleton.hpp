#pragma once

#include <cstdint>

#include "branchlab/field.hpp"
#include "branchlab/random.hpp"

namespace branchlab {

/// Time-one skeleton of a continuous-time process with purely local branching,
/// embedded in an n0-ary tree branching at rate sup r. A skeleton particle's
/// family over one unit of time is kept only when the tree has at most
/// `leaf_cap` leaves; offspring beyond n0 are dropped.
struct SkeletonSpec {
    double epsilon = 0.1;
    /// Solves (1 - e') exp(-e') = 1 - epsilon.
    double epsilon_prime = 0.0;
    std::uint32_t arity = 2;        ///< n0
    std::uint64_t leaf_cap = 1;     ///< m
    double rate_bound = 0.0;        ///< sup r
    /// Truncation loss sup r sum_{k > n0} k p_k (< epsilon_prime).
    double truncation_loss = 0.0;
    /// E[K 1(K > m)] for the leaf count K of the tree over unit time.
    double tail_mass = 0.0;
    /// Lower bound exp(-sup (r (1 - mean))^+) on the time-one Feynman-Kac weight.
    double mass_floor = 1.0;
};

/// Chooses n0 and m for the given branch data. Throws ValidationError unless
/// 0 < epsilon < 1 and sup r is finite.
SkeletonSpec minorizing_skeleton(const BranchField& branch, double epsilon);

/// E[K 1(K > m)] with K = 1 + (n0 - 1) J, J negative binomial, the leaf count of
/// an n0-ary Yule tree at `rate` over unit time.
double leaf_tail_mass(std::uint32_t arity, double rate, std::uint64_t leaf_cap);

/// Leaves at time `span` of an n0-ary Yule tree started from `lineages`
/// lineages, stopping early once the count exceeds `stop_above`.
std::uint64_t sample_leaves(std::uint32_t arity, double rate, double span, std::uint64_t lineages,
                            std::uint64_t stop_above, RandomSource& rng);

}  // namespace branchlab
