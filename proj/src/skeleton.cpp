#include "branchlab/skeleton.hpp"

#include <cmath>

namespace branchlab {

double leaf_tail_mass(std::uint32_t arity, double rate, std::uint64_t leaf_cap) {
    if (arity <= 1 || rate == 0.0) return leaf_cap >= 1 ? 0.0 : 1.0;
    const double k = arity - 1.0;
    const double theta = 1.0 / k;
    const double p = std::exp(-rate * k);
    // P(J = j) = Gamma(j + theta) / (Gamma(theta) j!) p^theta (1 - p)^j; E[K] = exp(rate k).
    long double below = 0.0L;
    long double pmf = std::pow(static_cast<long double>(p), static_cast<long double>(theta));
    for (std::uint64_t j = 0;; ++j) {
        const double leaves = 1.0 + k * static_cast<double>(j);
        if (leaves > static_cast<double>(leaf_cap)) break;
        below += leaves * pmf;
        pmf *= (static_cast<long double>(j) + theta) / (static_cast<long double>(j) + 1.0L) * (1.0L - p);
    }
    return std::max(0.0, static_cast<double>(std::exp(static_cast<long double>(rate * k)) - below));
}

std::uint64_t sample_leaves(std::uint32_t arity, double rate, double span, std::uint64_t lineages,
                            std::uint64_t stop_above, RandomSource& rng) {
    std::uint64_t count = lineages;
    if (arity <= 1 || rate <= 0.0) return count;
    double t = 0.0;
    while (count <= stop_above) {
        t += rng.exponential(rate * static_cast<double>(count));
        if (t >= span) break;
        count += arity - 1;
    }
    return count;
}

SkeletonSpec minorizing_skeleton(const BranchField& branch, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("skeleton epsilon must lie in (0, 1)");
    SkeletonSpec s;
    s.epsilon = epsilon;
    s.rate_bound = branch.rate_bound();
    if (!std::isfinite(s.rate_bound)) throw ValidationError("skeleton needs a bounded branching rate");
    // (1 - e) exp(-e) is decreasing on [0, 1]; bisect for 1 - epsilon.
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((1.0 - mid) * std::exp(-mid) > 1.0 - epsilon) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    s.epsilon_prime = lo;

    const auto& comps = branch.components();
    std::uint32_t max_count = 0;
    for (const auto& c : comps) {
        if (c.prob.upper() > 0.0) max_count = std::max(max_count, c.count);
    }
    s.arity = std::max<std::uint32_t>(max_count, 1);
    for (std::uint32_t n0 = 1; n0 <= max_count; ++n0) {
        double loss = 0.0;
        for (const auto& c : comps) {
            if (c.count > n0) loss += c.count * c.prob.upper();
        }
        loss *= s.rate_bound;
        if (loss < s.epsilon_prime) {
            s.arity = n0;
            s.truncation_loss = loss;
            break;
        }
    }

    double mean_lower = 0.0;
    for (const auto& c : comps) mean_lower += c.count * c.prob.lower();
    s.mass_floor = std::exp(-s.rate_bound * std::max(0.0, 1.0 - mean_lower));
    const double target = s.epsilon_prime * s.mass_floor;
    const std::uint64_t step = s.arity > 1 ? s.arity - 1 : 1;
    for (s.leaf_cap = 1;; s.leaf_cap += step) {
        s.tail_mass = leaf_tail_mass(s.arity, s.rate_bound, s.leaf_cap);
        if (s.tail_mass <= target) break;
        if (s.leaf_cap > (std::uint64_t{1} << 40)) throw ValidationError("skeleton leaf cap does not fit");
    }
    return s;
}

}  // namespace branchlab
