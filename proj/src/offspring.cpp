#include "branchlab/offspring.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace branchlab {

void Displacement::place_many(StateIndex parent, std::uint32_t n, std::uint64_t copies, RandomSource& rng,
                              std::vector<std::pair<StateIndex, std::uint64_t>>& out) const {
    std::vector<StateIndex> buf;
    for (std::uint64_t c = 0; c < copies; ++c) {
        buf.clear();
        place(parent, n, rng, buf);
        for (StateIndex s : buf) out.emplace_back(s, 1);
    }
}

void IndependentJumps::place(StateIndex parent, std::uint32_t n, RandomSource& rng,
                             std::vector<StateIndex>& out) const {
    std::vector<KernelEntry> row;
    row_(parent, row);
    for (std::uint32_t i = 0; i < n; ++i) {
        double u = rng.uniform();
        StateIndex target = row.empty() ? parent : row.back().to;
        for (const auto& e : row) {
            if (u < e.weight) {
                target = e.to;
                break;
            }
            u -= e.weight;
        }
        out.push_back(target);
    }
}

void IndependentJumps::expected_placements(StateIndex parent, std::uint32_t n,
                                           std::vector<KernelEntry>& out) const {
    std::vector<KernelEntry> row;
    row_(parent, row);
    for (const auto& e : row) out.push_back({e.to, e.weight * n});
}

void IndependentJumps::place_many(StateIndex parent, std::uint32_t n, std::uint64_t copies, RandomSource& rng,
                                  std::vector<std::pair<StateIndex, std::uint64_t>>& out) const {
    std::vector<KernelEntry> row;
    row_(parent, row);
    std::uint64_t remaining = copies * n;
    double mass_left = 1.0;
    for (std::size_t i = 0; i < row.size() && remaining > 0; ++i) {
        std::uint64_t k;
        if (i + 1 == row.size()) {
            k = remaining;
        } else {
            const double p = std::clamp(row[i].weight / mass_left, 0.0, 1.0);
            k = rng.binomial(remaining, p);
        }
        if (k > 0) out.emplace_back(row[i].to, k);
        remaining -= k;
        mass_left -= row[i].weight;
    }
}

OffspringLaw::OffspringLaw(std::vector<Outcome> outcomes, std::shared_ptr<const Displacement> displacement)
    : outcomes_(std::move(outcomes)), displacement_(std::move(displacement)) {
    if (outcomes_.empty()) throw ValidationError("offspring law has no outcomes");
    std::sort(outcomes_.begin(), outcomes_.end(),
              [](const Outcome& a, const Outcome& b) { return a.count < b.count; });
    double total = 0.0;
    for (std::size_t i = 0; i < outcomes_.size(); ++i) {
        const auto& o = outcomes_[i];
        if (!(o.prob >= 0.0) || !std::isfinite(o.prob)) {
            throw ValidationError("offspring probability for n=" + std::to_string(o.count) + " is not a nonnegative number");
        }
        if (i > 0 && outcomes_[i - 1].count == o.count) {
            throw ValidationError("offspring count n=" + std::to_string(o.count) + " listed twice");
        }
        total += o.prob;
    }
    if (std::abs(total - 1.0) >= 1e-12) {
        throw ValidationError("offspring probabilities sum to " + std::to_string(total) + ", not 1");
    }
    std::erase_if(outcomes_, [](const Outcome& o) { return o.prob == 0.0; });
    double acc = 0.0;
    cumulative_.reserve(outcomes_.size());
    for (auto& o : outcomes_) {
        o.prob /= total;
        acc += o.prob;
        cumulative_.push_back(acc);
        mean_ += o.count * o.prob;
    }
    cumulative_.back() = 1.0;
}

OffspringLaw OffspringLaw::deterministic(std::uint32_t count) {
    return OffspringLaw({{count, 1.0}});
}

OffspringLaw OffspringLaw::binary(double p_two) {
    if (p_two >= 1.0) return deterministic(2);
    if (p_two <= 0.0) return deterministic(0);
    return OffspringLaw({{0, 1.0 - p_two}, {2, p_two}});
}

double OffspringLaw::prob(std::uint32_t count) const {
    for (const auto& o : outcomes_) {
        if (o.count == count) return o.prob;
    }
    return 0.0;
}

std::uint32_t OffspringLaw::sample_count(RandomSource& rng) const {
    if (outcomes_.size() == 1) return outcomes_.front().count;
    const double u = rng.uniform();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), outcomes_.size() - 1);
    return outcomes_[idx].count;
}

void OffspringLaw::sample_counts(std::uint64_t parents, RandomSource& rng, std::vector<std::uint64_t>& per_outcome) const {
    per_outcome.assign(outcomes_.size(), 0);
    double mass_left = 1.0;
    std::uint64_t remaining = parents;
    for (std::size_t i = 0; i < outcomes_.size() && remaining > 0; ++i) {
        if (i + 1 == outcomes_.size()) {
            per_outcome[i] = remaining;
            break;
        }
        const double p = std::clamp(outcomes_[i].prob / mass_left, 0.0, 1.0);
        per_outcome[i] = rng.binomial(remaining, p);
        remaining -= per_outcome[i];
        mass_left -= outcomes_[i].prob;
    }
}

std::vector<StateIndex> sample_offspring(const OffspringLaw& law, StateIndex parent, RandomSource& rng) {
    const std::uint32_t n = law.sample_count(rng);
    std::vector<StateIndex> children;
    children.reserve(n);
    if (law.displacement()) {
        law.displacement()->place(parent, n, rng, children);
    } else {
        children.assign(n, parent);
    }
    return children;
}

double generating_value(const OffspringLaw& law, double s) {
    if (!(s >= 0.0 && s <= 1.0)) throw std::domain_error("generating_value: s must lie in [0, 1]");
    double value = 0.0;
    for (const auto& o : law.outcomes()) value += o.prob * std::pow(s, static_cast<double>(o.count));
    return std::min(value, 1.0);
}

}  // namespace branchlab
