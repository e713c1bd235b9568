#include "branchlab/bmp.hpp"

#include <algorithm>
#include <cmath>

#include "branchlab/parallel.hpp"

namespace branchlab {

void BmpConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be positive");
    if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw ValidationError("horizon must be finite and nonnegative");
    if (cap < 1) throw ValidationError("cap must be at least 1");
    if (!(record_interval > 0.0)) throw ValidationError("record_interval must be positive");
}

std::size_t ParticleSystem::count_in(double lo, double hi) const {
    return static_cast<std::size_t>(
        std::count_if(particles.begin(), particles.end(), [&](const Particle& p) { return p.x >= lo && p.x <= hi; }));
}

namespace {

struct SkeletonState {
    const SkeletonSpec* spec = nullptr;
    std::vector<std::uint64_t> phantom;
    double next_integer = 1.0;

    bool active() const { return spec != nullptr; }

    void prune(std::uint32_t family, std::uint64_t lineages, double at, RandomSource& rng) {
        if (family == kNoFamily || lineages == 0) return;
        auto& leaves = phantom[family];
        if (leaves > spec->leaf_cap) return;
        leaves += sample_leaves(spec->arity, spec->rate_bound, next_integer - at, lineages, spec->leaf_cap, rng);
    }
};

}  // namespace

BmpRun simulate_bmp(const MotionSpec& motion, const BranchField& branch, double start, const BmpConfig& cfg,
                    RandomSource& rng, const SkeletonSpec* skeleton) {
    cfg.validate();
    const MotionStepper stepper(motion);
    if (!motion.domain.contains(start)) throw ValidationError("start point lies outside the motion domain");
    const double rate_bound = branch.rate_bound();
    if (!std::isfinite(rate_bound) || rate_bound < 0.0) throw ValidationError("branching rate must be bounded");

    long steps_per_unit = 0;
    SkeletonState skel;
    if (skeleton) {
        const double inv = 1.0 / cfg.dt;
        steps_per_unit = std::lround(inv);
        if (std::abs(inv - static_cast<double>(steps_per_unit)) > 1e-9 * inv) {
            throw ValidationError("skeleton runs need 1/dt to be an integer");
        }
        if (skeleton->rate_bound < rate_bound) throw ValidationError("skeleton was built for a smaller rate bound");
        skel.spec = skeleton;
        skel.phantom.assign(1, 0);
    }

    BmpRun run;
    std::vector<Particle> current{{start, rng.exponential(rate_bound), skeleton ? 0u : kNoFamily}}, next;
    std::vector<std::pair<Particle, double>> pending;
    run.trace.record(0.0, 1);
    if (skeleton) {
        run.integer_counts.push_back(1);
        run.skeleton_counts.push_back(1);
    }
    if (cfg.cap <= 1) {
        run.trace.terminator = Terminator::cap_hit;
        run.final.particles = current;
        return run;
    }

    const long n_steps = static_cast<long>(std::ceil(cfg.horizon / cfg.dt - 1e-9));
    double next_record = cfg.record_interval;
    double t = 0.0;
    const std::uint32_t arity = skeleton ? skeleton->arity : 0;

    for (long step = 1; step <= n_steps; ++step) {
        const double t_end = step == n_steps ? cfg.horizon : static_cast<double>(step) * cfg.dt;
        const double h = t_end - t;
        next.clear();
        for (const auto& p : current) {
            pending.emplace_back(p, h);
            while (!pending.empty()) {
                auto [q, rem] = pending.back();
                pending.pop_back();
                while (true) {
                    if (q.clock >= rem) {
                        const bool alive = stepper.advance(q.x, rem, rng);
                        q.clock -= rem;
                        run.total_mass += rem;
                        if (alive) {
                            next.push_back(q);
                        } else if (skel.active()) {
                            skel.prune(q.family, 1, t_end, rng);
                        }
                        break;
                    }
                    const double advance = q.clock;
                    const bool alive = stepper.advance(q.x, advance, rng);
                    run.total_mass += advance;
                    rem -= advance;
                    const double event_time = t_end - rem;
                    if (!alive) {
                        if (skel.active()) skel.prune(q.family, 1, event_time, rng);
                        break;
                    }
                    if (rng.uniform() * rate_bound < branch.rate(q.x)) {
                        const std::uint32_t n = branch.sample_count(q.x, rng);
                        const bool tracked = skel.active() && q.family != kNoFamily;
                        const std::uint32_t kept = tracked ? std::min(n, arity) : 0;
                        if (tracked) skel.prune(q.family, arity - kept, event_time, rng);
                        for (std::uint32_t i = n; i-- > 0;) {
                            Particle child{q.x, rng.exponential(rate_bound), i < kept ? q.family : kNoFamily};
                            pending.emplace_back(child, rem);
                        }
                        break;
                    }
                    if (skel.active() && q.family != kNoFamily && arity > 1) {
                        skel.prune(q.family, arity - 1, event_time, rng);
                    }
                    q.clock = rng.exponential(rate_bound);
                }
            }
        }
        current.swap(next);
        t = t_end;

        if (skel.active() && step % steps_per_unit == 0) {
            std::vector<std::uint64_t> living(skel.phantom.size(), 0);
            for (const auto& p : current) {
                if (p.family != kNoFamily) ++living[p.family];
            }
            std::uint32_t families = 0;
            for (auto& p : current) {
                if (p.family == kNoFamily) continue;
                const bool keep = living[p.family] + skel.phantom[p.family] <= skeleton->leaf_cap;
                p.family = keep ? families++ : kNoFamily;
            }
            skel.phantom.assign(families, 0);
            skel.next_integer += 1.0;
            run.integer_counts.push_back(current.size());
            run.skeleton_counts.push_back(families);
        }

        const bool last = step == n_steps;
        const bool extinct = current.empty();
        const bool capped = current.size() >= cfg.cap;
        if (t >= next_record - 1e-9 * cfg.record_interval || last || extinct || capped) {
            run.trace.record(t, current.size());
            while (next_record <= t + 1e-9 * cfg.record_interval) next_record += cfg.record_interval;
        }
        if (extinct) {
            run.trace.terminator = Terminator::extinct;
            break;
        }
        if (capped) {
            run.trace.terminator = Terminator::cap_hit;
            break;
        }
    }
    run.final.time = t;
    run.final.particles = std::move(current);
    return run;
}

void for_each_replica(const MotionSpec& motion, const BranchField& branch, double start, const BmpConfig& cfg,
                      const RandomSource& rng, const std::function<void(std::size_t, BmpRun&&)>& visit,
                      const SkeletonSpec* skeleton, int threads) {
    cfg.validate();
    motion.validate();
    parallel_for(
        cfg.replicas,
        [&](std::size_t i) {
            auto local = rng.replica(i);
            visit(i, simulate_bmp(motion, branch, start, cfg, local, skeleton));
        },
        threads);
}

BmpSurvival bmp_survival_mc(const MotionSpec& motion, const BranchField& branch, double start, const BmpConfig& cfg,
                            const RandomSource& rng, int threads) {
    std::vector<Terminator> ends(cfg.replicas);
    for_each_replica(motion, branch, start, cfg, rng, [&](std::size_t i, BmpRun&& r) { ends[i] = r.trace.terminator; },
                     nullptr, threads);
    BmpSurvival out;
    std::uint64_t alive = 0;
    for (auto e : ends) {
        if (e != Terminator::extinct) ++alive;
        if (e == Terminator::cap_hit) ++out.cap_hits;
    }
    out.survival = proportion(alive, cfg.replicas);
    return out;
}

McEstimate mass_mc(const MotionSpec& motion, const BranchField& branch, double start, const BmpConfig& cfg,
                   const RandomSource& rng, int threads) {
    std::vector<double> counts(cfg.replicas);
    std::vector<char> capped(cfg.replicas, 0);
    for_each_replica(
        motion, branch, start, cfg, rng,
        [&](std::size_t i, BmpRun&& r) {
            counts[i] = static_cast<double>(r.trace.final_count());
            capped[i] = r.trace.terminator == Terminator::cap_hit;
        },
        nullptr, threads);
    if (std::find(capped.begin(), capped.end(), 1) != capped.end()) {
        throw ValidationError("population cap reached; raise cap to estimate the mean of N_t");
    }
    return sample_mean(counts);
}

TotalMassReport total_mass_estimate(const MotionSpec& motion, const BranchField& branch, double start,
                                    const BmpConfig& cfg, const RandomSource& rng, int threads) {
    std::vector<double> mass(cfg.replicas);
    std::vector<char> censored(cfg.replicas, 0);
    for_each_replica(
        motion, branch, start, cfg, rng,
        [&](std::size_t i, BmpRun&& r) {
            mass[i] = r.total_mass;
            censored[i] = r.trace.terminator != Terminator::extinct;
        },
        nullptr, threads);
    TotalMassReport rep;
    rep.mass = sample_mean(mass);
    rep.censored = static_cast<std::uint64_t>(std::count(censored.begin(), censored.end(), 1));
    if (static_cast<double>(rep.censored) > 0.01 * static_cast<double>(cfg.replicas)) {
        rep.warning = std::to_string(rep.censored) + " of " + std::to_string(cfg.replicas) +
                      " replicas were still alive at the horizon; the total mass is censored";
    }
    return rep;
}

McEstimate local_survival_mc(const MotionSpec& motion, const BranchField& branch, double start, double lo, double hi,
                             const BmpConfig& cfg, const RandomSource& rng, int threads) {
    if (!(lo < hi)) throw ValidationError("local window needs lo < hi");
    std::vector<char> hit(cfg.replicas, 0);
    for_each_replica(
        motion, branch, start, cfg, rng,
        [&](std::size_t i, BmpRun&& r) { hit[i] = r.final.count_in(lo, hi) > 0; }, nullptr, threads);
    return proportion(static_cast<std::uint64_t>(std::count(hit.begin(), hit.end(), 1)), cfg.replicas);
}

}  // namespace branchlab
