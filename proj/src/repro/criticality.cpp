#include "branchlab/repro/criticality.hpp"

#include <cmath>
#include <string>

#include "branchlab/parallel.hpp"
#include "branchlab/types.hpp"

namespace branchlab::repro {

namespace {

constexpr double kDrift = 2.0;

double g(double x) { return x >= 1.0 ? 1.0 / std::sqrt(x) : 0.0; }

/// Antiderivative of g, 0 below 1.
double g_integral(double x) { return x >= 1.0 ? 2.0 * std::sqrt(x) - 2.0 : 0.0; }

}  // namespace

std::string_view to_string(CriticalityMode mode) {
    switch (mode) {
        case CriticalityMode::branching_g: return "branching_g";
        case CriticalityMode::killing_g: return "killing_g";
        case CriticalityMode::branching_g_minus_eps: return "branching_g_minus_eps";
        case CriticalityMode::killing_g_plus_eps: return "killing_g_plus_eps";
    }
    return "unknown";
}

CriticalityMode parse_criticality_mode(std::string_view name) {
    for (auto m : {CriticalityMode::branching_g, CriticalityMode::killing_g, CriticalityMode::branching_g_minus_eps,
                   CriticalityMode::killing_g_plus_eps}) {
        if (to_string(m) == name) return m;
    }
    throw ValidationError("unknown criticality mode '" + std::string(name) + "'");
}

MotionSpec criticality_motion(double horizon) {
    Interval domain;
    domain.right = 10.0 * horizon * kDrift;
    domain.right_boundary = Boundary::reflecting;
    return MotionSpec::brownian(domain, kDrift, 1.0);
}

BranchField criticality_branch(CriticalityMode mode, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in (0, 1)");
    const ScalarField rate_g(g, 0.0, 1.0);
    const ScalarField rate_eps([epsilon](double x) { return g(x) + epsilon; }, epsilon, 1.0 + epsilon);
    const ScalarField g_share([epsilon](double x) { return g(x) / (g(x) + epsilon); }, 0.0, 1.0 / (1.0 + epsilon));
    const ScalarField eps_share([epsilon](double x) { return epsilon / (g(x) + epsilon); }, epsilon / (1.0 + epsilon),
                                1.0);
    switch (mode) {
        case CriticalityMode::branching_g: return BranchField(rate_g, std::vector<OffspringComponent>{{2, 1.0}});
        case CriticalityMode::killing_g: return BranchField(rate_g, std::vector<OffspringComponent>{{0, 1.0}});
        case CriticalityMode::branching_g_minus_eps: return BranchField(rate_eps, std::vector<OffspringComponent>{{2, g_share}, {0, eps_share}});
        case CriticalityMode::killing_g_plus_eps: return BranchField(rate_eps, std::vector<OffspringComponent>{{0, g_share}, {2, eps_share}});
    }
    throw ValidationError("unknown criticality mode");
}

std::vector<CriticalityPoint> criticality_example_mc(CriticalityMode mode, const std::vector<double>& horizons,
                                                     std::uint64_t replicas, const RandomSource& rng,
                                                     const CriticalitySettings& settings) {
    if (horizons.empty() || replicas == 0) throw ValidationError("criticality run needs horizons and replicas");
    for (std::size_t k = 0; k < horizons.size(); ++k) {
        if (horizons[k] < 100.0 || (k > 0 && horizons[k] <= horizons[k - 1])) {
            throw ValidationError("horizons must be ascending and at least 100");
        }
    }
    const double t_max = horizons.back();
    const auto motion = criticality_motion(t_max);
    const auto branch = criticality_branch(mode, settings.epsilon);
    const std::size_t nh = horizons.size();

    // Survival at each horizon from the recorded trace.
    BmpConfig cfg;
    cfg.dt = settings.dt;
    cfg.horizon = t_max;
    cfg.cap = settings.cap;
    cfg.replicas = replicas;
    cfg.record_interval = horizons.front();
    for (double h : horizons) {
        const double q = h / cfg.record_interval;
        if (std::abs(q - std::round(q)) > 1e-9) cfg.record_interval = 1.0;
    }
    std::vector<std::vector<unsigned char>> alive(nh, std::vector<unsigned char>(replicas, 0));
    std::vector<unsigned char> capped(replicas, 0);
    for_each_replica(
        motion, branch, settings.start, cfg, rng,
        [&](std::size_t i, BmpRun&& run) {
            const auto& tr = run.trace;
            capped[i] = tr.terminator == Terminator::cap_hit;
            for (std::size_t h = 0; h < nh; ++h) {
                bool a = tr.terminator == Terminator::cap_hit && tr.times.back() <= horizons[h] + 1e-9;
                for (std::size_t k = 0; k < tr.times.size() && !a; ++k) {
                    if (std::abs(tr.times[k] - horizons[h]) < 1e-9) a = tr.counts[k] > 0;
                }
                alive[h][i] = a ? 1 : 0;
            }
        },
        nullptr, settings.threads);

    std::vector<CriticalityPoint> out(nh);
    std::uint64_t cap_hits = 0;
    for (auto c : capped) cap_hits += c;
    for (std::size_t h = 0; h < nh; ++h) {
        std::uint64_t n = 0;
        for (auto a : alive[h]) n += a;
        out[h].horizon = horizons[h];
        out[h].frequency = proportion(n, replicas);
        out[h].cap_hits = cap_hits;
    }

    if (mode == CriticalityMode::killing_g) {
        // Rao-Blackwellized survival: the killing clock integrated along an
        // unkilled path, with the same time grid as the particle engine.
        const RandomSource paths = rng.replica(0x6b696c6cull);
        std::vector<std::vector<double>> weight(nh, std::vector<double>(replicas));
        const MotionStepper stepper(motion);
        parallel_for(
            replicas,
            [&](std::size_t i) {
                auto local = paths.replica(i);
                double x = settings.start, t = 0.0, integral = 0.0;
                std::size_t h = 0;
                const auto steps = static_cast<std::uint64_t>(std::llround(t_max / settings.dt));
                for (std::uint64_t k = 1; k <= steps; ++k) {
                    const double before = x;
                    stepper.advance(x, settings.dt, local);
                    integral += before == x ? settings.dt * g(x)
                                            : settings.dt * (g_integral(x) - g_integral(before)) / (x - before);
                    t = static_cast<double>(k) * settings.dt;
                    while (h < nh && t >= horizons[h] - 1e-9) weight[h++][i] = std::exp(-integral);
                }
            },
            settings.threads);
        for (std::size_t h = 0; h < nh; ++h) out[h].conditional = sample_mean(weight[h]);
    }
    return out;
}

}  // namespace branchlab::repro
