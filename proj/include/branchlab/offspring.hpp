#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "branchlab/random.hpp"
#include "branchlab/types.hpp"

namespace branchlab {

/// Where the children of a particle at `parent` are placed.
class Displacement {
public:
    virtual ~Displacement() = default;

    /// Append the positions of `n` children of a particle at `parent`.
    virtual void place(StateIndex parent, std::uint32_t n, RandomSource& rng,
                       std::vector<StateIndex>& out) const = 0;

    /// Add the expected number of children at each site, given that there are `n` of them.
    virtual void expected_placements(StateIndex parent, std::uint32_t n,
                                     std::vector<KernelEntry>& out) const = 0;

    /// Place `copies * n` children of `copies` parents at `parent`, accumulating
    /// counts per site. The default calls place() per parent.
    virtual void place_many(StateIndex parent, std::uint32_t n, std::uint64_t copies,
                            RandomSource& rng,
                            std::vector<std::pair<StateIndex, std::uint64_t>>& out) const;
};

/// Each child jumps independently according to a sparse transition row.
class IndependentJumps final : public Displacement {
public:
    using JumpRow = std::function<void(StateIndex, std::vector<KernelEntry>&)>;

    explicit IndependentJumps(JumpRow row) : row_(std::move(row)) {}

    void place(StateIndex parent, std::uint32_t n, RandomSource& rng,
               std::vector<StateIndex>& out) const override;
    void expected_placements(StateIndex parent, std::uint32_t n,
                             std::vector<KernelEntry>& out) const override;
    void place_many(StateIndex parent, std::uint32_t n, std::uint64_t copies, RandomSource& rng,
                    std::vector<std::pair<StateIndex, std::uint64_t>>& out) const override;

    void jump_row(StateIndex parent, std::vector<KernelEntry>& out) const { row_(parent, out); }

private:
    JumpRow row_;
};

/// Offspring distribution (p_n) with finite support and an optional displacement
/// kernel. Without a displacement, branching is purely local.
class OffspringLaw {
public:
    struct Outcome {
        std::uint32_t count = 0;
        double prob = 0.0;
    };

    /// Validates and normalizes. Throws ValidationError on negative probabilities,
    /// duplicate counts, or a total deviating from 1 by 1e-12 or more.
    explicit OffspringLaw(std::vector<Outcome> outcomes,
                          std::shared_ptr<const Displacement> displacement = nullptr);

    /// Single outcome with probability one.
    static OffspringLaw deterministic(std::uint32_t count);
    /// p_0 = 1 - p, p_2 = p.
    static OffspringLaw binary(double p_two);

    std::span<const Outcome> outcomes() const { return outcomes_; }
    const std::shared_ptr<const Displacement>& displacement() const { return displacement_; }
    double mean() const { return mean_; }
    double prob(std::uint32_t count) const;
    std::uint32_t max_count() const { return outcomes_.back().count; }

    /// Draws a child count.
    std::uint32_t sample_count(RandomSource& rng) const;
    /// Multinomial split of `parents` independent draws into per-outcome parent counts.
    void sample_counts(std::uint64_t parents, RandomSource& rng, std::vector<std::uint64_t>& per_outcome) const;

private:
    std::vector<Outcome> outcomes_;
    std::vector<double> cumulative_;
    std::shared_ptr<const Displacement> displacement_;
    double mean_ = 0.0;
};

/// Children of one particle at `parent`: n with probability p_n, placed by the
/// displacement kernel or all at `parent` when the law is purely local.
std::vector<StateIndex> sample_offspring(const OffspringLaw& law, StateIndex parent, RandomSource& rng);

/// Probability generating function sum_n p_n s^n, for s in [0, 1].
/// Throws std::domain_error outside [0, 1].
double generating_value(const OffspringLaw& law, double s);

}  // namespace branchlab
