#include "branchlab/repro/mutation.hpp"

#include <cmath>
#include <memory>

#include "branchlab/parallel.hpp"

namespace branchlab::repro {

bool is_power_of_four(std::uint64_t t) { return t != 0 && (t & (t - 1)) == 0 && (t & 0x5555555555555555ull) != 0; }

StateIndex mutation_state(std::uint64_t time, MutationPath path) {
    return StateIndex{2 * time + static_cast<std::uint64_t>(path)};
}

std::uint64_t mutation_time(StateIndex s) { return s.id / 2; }

MutationPath mutation_path(StateIndex s) { return static_cast<MutationPath>(s.id % 2); }

namespace {

class MutationMoves final : public Displacement {
public:
    void place(StateIndex parent, std::uint32_t n, RandomSource& rng, std::vector<StateIndex>& out) const override {
        const auto t = mutation_time(parent);
        auto next = mutation_path(parent);
        // The parent picks the path; all of its children follow it.
        if (next == MutationPath::main && is_power_of_four(t) && rng.uniform() >= switch_probability(t)) {
            next = MutationPath::side;
        }
        for (std::uint32_t i = 0; i < n; ++i) out.push_back(mutation_state(t + 1, next));
    }

    void place_many(StateIndex parent, std::uint32_t n, std::uint64_t copies, RandomSource& rng,
                    std::vector<std::pair<StateIndex, std::uint64_t>>& out) const override {
        const auto t = mutation_time(parent);
        const auto path = mutation_path(parent);
        if (path == MutationPath::main && is_power_of_four(t)) {
            const auto stay = rng.binomial(copies, switch_probability(t));
            if (stay > 0) out.push_back({mutation_state(t + 1, MutationPath::main), stay * n});
            if (stay < copies) out.push_back({mutation_state(t + 1, MutationPath::side), (copies - stay) * n});
        } else {
            out.push_back({mutation_state(t + 1, path), copies * n});
        }
    }

    void expected_placements(StateIndex parent, std::uint32_t n, std::vector<KernelEntry>& out) const override {
        const auto t = mutation_time(parent);
        const auto path = mutation_path(parent);
        if (path == MutationPath::main && is_power_of_four(t)) {
            const double p = switch_probability(t);
            out.push_back({mutation_state(t + 1, MutationPath::main), n * p});
            out.push_back({mutation_state(t + 1, MutationPath::side), n * (1.0 - p)});
        } else {
            out.push_back({mutation_state(t + 1, path), static_cast<double>(n)});
        }
    }

private:
    static double switch_probability(std::uint64_t t) { return std::ldexp(1.0, -3 * static_cast<int>(std::min<std::uint64_t>(t, 2000))); }
};

}  // namespace

BmcSpec mutation_spec() {
    auto moves = std::make_shared<const MutationMoves>();
    auto four = std::make_shared<const OffspringLaw>(std::vector<OffspringLaw::Outcome>{{4, 1.0}}, moves);
    auto none = std::make_shared<const OffspringLaw>(OffspringLaw::deterministic(0));
    return {[four, none](StateIndex s) {
        const bool killed_next = mutation_path(s) == MutationPath::side && is_power_of_four(mutation_time(s) + 1);
        return killed_next ? none : four;
    }};
}

std::vector<cpp_rational> mutation_expected_counts(int n_max) {
    if (n_max < 0 || n_max > 4096) throw ValidationError("mutation_expected_counts needs 0 <= n_max <= 4^6");
    std::vector<cpp_rational> out;
    cpp_rational main = 1, side = 0;
    out.push_back(main + side);
    for (std::uint64_t t = 0; t < static_cast<std::uint64_t>(n_max); ++t) {
        cpp_rational next_main, next_side;
        if (is_power_of_four(t)) {
            const cpp_rational p(cpp_int(1), cpp_int(1) << (3 * t));
            next_main = 4 * main * p;
            next_side = 4 * main * (1 - p) + 4 * side;
        } else {
            next_main = 4 * main;
            next_side = 4 * side;
        }
        if (is_power_of_four(t + 1)) next_side = 0;
        main = next_main;
        side = next_side;
        out.push_back(main + side);
    }
    return out;
}

namespace {

double log2_int(const cpp_int& v) {
    const auto bits = static_cast<long>(boost::multiprecision::msb(v));
    if (bits < 60) return std::log2(v.convert_to<double>());
    const cpp_int top = v >> static_cast<unsigned>(bits - 60);
    return static_cast<double>(bits - 60) + std::log2(top.convert_to<double>());
}

}  // namespace

double log2_of(const cpp_rational& q) {
    if (q <= 0) throw ValidationError("log2 of a nonpositive rational");
    return log2_int(boost::multiprecision::numerator(q)) - log2_int(boost::multiprecision::denominator(q));
}

GrowthWindow mutation_growth(int n_max) {
    if (n_max < 8) throw ValidationError("mutation growth needs n_max >= 8");
    const auto counts = mutation_expected_counts(n_max);
    GrowthWindow w;
    w.roots.assign(counts.size(), 0.0);
    for (std::size_t n = 1; n < counts.size(); ++n) w.roots[n] = std::exp2(log2_of(counts[n]) / static_cast<double>(n));
    w.first = (n_max + 1) / 2;
    w.last = n_max;
    w.window_min = w.window_max = w.roots[static_cast<std::size_t>(w.first)];
    w.argmin = w.argmax = w.first;
    for (int n = w.first; n <= n_max; ++n) {
        const double r = w.roots[static_cast<std::size_t>(n)];
        if (r < w.window_min) {
            w.window_min = r;
            w.argmin = n;
        }
        if (r > w.window_max) {
            w.window_max = r;
            w.argmax = n;
        }
    }
    return w;
}

MutationSurvivalReport mutation_survival_mc(const std::vector<std::uint64_t>& horizons, std::uint64_t replicas,
                                            const RandomSource& rng, int threads) {
    if (horizons.empty() || replicas == 0) throw ValidationError("mutation survival needs horizons and replicas");
    for (std::size_t k = 0; k < horizons.size(); ++k) {
        if (!is_power_of_four(horizons[k]) || (k > 0 && horizons[k] <= horizons[k - 1])) {
            throw ValidationError("horizons must be ascending powers of 4");
        }
    }
    if (horizons.back() > 256) throw ValidationError("horizons above 4^4 overflow the main-path count");
    const std::uint64_t t_max = horizons.back();
    const std::size_t nh = horizons.size();
    std::vector<std::vector<double>> weights(nh, std::vector<double>(replicas));
    std::vector<std::vector<double>> raw(nh, std::vector<double>(replicas));
    std::vector<double> switch_ratio(replicas, 0.0), population_ratio(replicas, 0.0);

    parallel_for(
        replicas,
        [&](std::size_t i) {
            auto local = rng.replica(i);
            // Weighted path: main-path count M (kept alive), side count as a fraction of 4^t.
            double main = 1.0, weight = 1.0, side_frac = 0.0;
            double raw_main = 1.0;
            std::size_t h = 0;
            for (std::uint64_t t = 0; t <= t_max; ++t) {
                const double scale = std::ldexp(1.0, -2 * static_cast<int>(t));
                population_ratio[i] = std::max(population_ratio[i], main * scale + side_frac);
                while (h < nh && horizons[h] == t) {
                    weights[h][i] = weight;
                    raw[h][i] = raw_main > 0.0 ? 1.0 : 0.0;
                    ++h;
                }
                if (t == t_max) break;
                if (is_power_of_four(t)) {
                    // Each main-path particle picks the rare path with probability p and
                    // takes its 4 children along.
                    const double p = std::ldexp(1.0, -3 * static_cast<int>(t));
                    const double hit = -std::expm1(main * std::log1p(-p));
                    switch_ratio[i] = std::max(switch_ratio[i], hit / std::ldexp(1.0, -static_cast<int>(t)));
                    const double kept = local.binomial_small_mean(main, p, 1);
                    weight *= hit;
                    side_frac = 4.0 * (main - kept) * std::ldexp(1.0, -2 * static_cast<int>(t + 1));
                    main = 4.0 * kept;
                    if (raw_main > 0.0) raw_main = 4.0 * local.binomial_small_mean(raw_main, p, 0);
                } else {
                    main *= 4.0;
                    raw_main *= 4.0;
                }
                if (is_power_of_four(t + 1)) side_frac = 0.0;
            }
        },
        threads);

    MutationSurvivalReport rep;
    for (std::size_t h = 0; h < nh; ++h) {
        std::uint64_t alive = 0;
        for (double v : raw[h]) alive += v > 0.0 ? 1 : 0;
        rep.horizons.push_back({horizons[h], sample_mean(weights[h]), proportion(alive, replicas)});
    }
    for (std::size_t i = 0; i < replicas; ++i) {
        rep.worst_switch_ratio = std::max(rep.worst_switch_ratio, switch_ratio[i]);
        rep.worst_population_ratio = std::max(rep.worst_population_ratio, population_ratio[i]);
    }
    if (rep.worst_population_ratio > 1.0 + 1e-12) throw Error("mutation chain exceeded 4^t particles");
    return rep;
}

}  // namespace branchlab::repro
