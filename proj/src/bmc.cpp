#include "branchlab/bmc.hpp"

#include <cmath>

#include "branchlab/gw.hpp"
#include "branchlab/parallel.hpp"

namespace branchlab {

BmcSpec BmcSpec::uniform(OffspringLaw law) {
    auto shared = std::make_shared<const OffspringLaw>(std::move(law));
    return {[shared](StateIndex) { return shared; }};
}

ExpectationKernel expectation_kernel(const BmcSpec& spec) {
    return ExpectationKernel([law = spec.law](StateIndex x, std::vector<KernelEntry>& out) {
        const auto l = law(x);
        if (!l->displacement()) {
            out.push_back({x, l->mean()});
            return;
        }
        std::vector<KernelEntry> placed;
        for (const auto& o : l->outcomes()) {
            if (o.count == 0) continue;
            placed.clear();
            l->displacement()->expected_placements(x, o.count, placed);
            for (const auto& e : placed) out.push_back({e.to, o.prob * e.weight});
        }
    });
}

double expected_counts(const BmcSpec& spec, StateIndex start, int n, std::size_t cap) {
    const auto last = scaled_mass_sequence(expectation_kernel(spec), start, n, cap).back();
    return std::ldexp(last.mantissa, last.binary_scale);
}

BmcRun simulate(const BmcSpec& spec, StateIndex start, int horizon, std::uint64_t cap, RandomSource& rng) {
    BmcRun run;
    Occupation current{{start, 1}}, next;
    run.trace.record(0, 1);
    if (cap <= 1) {
        run.trace.terminator = Terminator::cap_hit;
        run.final_particles = current;
        return run;
    }
    std::vector<std::uint64_t> per_outcome;
    std::vector<std::pair<StateIndex, std::uint64_t>> placed;
    for (int gen = 1; gen <= horizon; ++gen) {
        next.clear();
        for (const auto& [state, count] : current) {
            const auto law = spec.law(state);
            law->sample_counts(count, rng, per_outcome);
            const auto outcomes = law->outcomes();
            for (std::size_t i = 0; i < outcomes.size(); ++i) {
                const std::uint64_t parents = per_outcome[i];
                const std::uint32_t n = outcomes[i].count;
                if (parents == 0 || n == 0) continue;
                if (!law->displacement()) {
                    next[state] += parents * n;
                    continue;
                }
                placed.clear();
                law->displacement()->place_many(state, n, parents, rng, placed);
                for (const auto& [s, k] : placed) next[s] += k;
            }
        }
        current.swap(next);
        std::uint64_t total = 0;
        for (const auto& [s, k] : current) total += k;
        run.trace.record(gen, total);
        if (total == 0) {
            run.trace.terminator = Terminator::extinct;
            break;
        }
        if (total >= cap) {
            run.trace.terminator = Terminator::cap_hit;
            break;
        }
    }
    run.final_particles = std::move(current);
    return run;
}

std::vector<PopulationTrace> simulate_replicas(const BmcSpec& spec, StateIndex start, int horizon, std::uint64_t cap,
                                               std::uint64_t replicas, const RandomSource& rng, int threads) {
    std::vector<PopulationTrace> traces(replicas);
    parallel_for(
        replicas,
        [&](std::size_t i) {
            auto local = rng.replica(i);
            traces[i] = simulate(spec, start, horizon, cap, local).trace;
        },
        threads);
    return traces;
}

BmcSurvival survival_probability_mc(const BmcSpec& spec, StateIndex start, int horizon, std::uint64_t cap,
                                    std::uint64_t replicas, const RandomSource& rng, int threads) {
    const auto traces = simulate_replicas(spec, start, horizon, cap, replicas, rng, threads);
    BmcSurvival out;
    std::uint64_t alive = 0;
    for (const auto& t : traces) {
        if (t.survived()) ++alive;
        if (t.terminator == Terminator::cap_hit) ++out.cap_hits;
    }
    out.survival = proportion(alive, replicas);
    const auto law = spec.law(start);
    const auto solve = solve_extinction(OffspringLaw(std::vector<OffspringLaw::Outcome>(law->outcomes().begin(),
                                                                                          law->outcomes().end())));
    if (solve.converged) out.cap_bias_bound = std::pow(solve.probability, static_cast<double>(cap));
    return out;
}

}  // namespace branchlab
