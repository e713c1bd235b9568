#include <atomic>
#include <cmath>
#include <limits>

#include "branchlab/bmp.hpp"
#include "branchlab/parallel.hpp"

namespace branchlab {

namespace {

Boundary grid_boundary(Boundary b) { return b == Boundary::open ? Boundary::dirichlet : b; }

int radial_dimension(const MotionSpec& m) { return m.kind == MotionKind::diffusion_radial ? m.dimension : 1; }

// Crank-Nicolson for dw/dt = A w with Rannacher startup (first two steps as four
// implicit Euler half-steps).
class LinearPropagator {
public:
    LinearPropagator(const Tridiagonal& a, double dt)
        : a_(a), dt_(dt), implicit_half_(a, 1.0, -0.5 * dt), cn_(a, 1.0, -0.5 * dt), work_(a.size()) {}

    void advance(std::vector<double>& w, long steps) {
        for (long s = 0; s < steps; ++s, ++taken_) {
            if (taken_ < 2) {
                implicit_half_.solve(w);
                implicit_half_.solve(w);
                continue;
            }
            a_.apply(w, work_);
            for (std::size_t i = 0; i < w.size(); ++i) w[i] += 0.5 * dt_ * work_[i];
            cn_.solve(w);
        }
    }

private:
    const Tridiagonal& a_;
    double dt_;
    TridiagonalSolver implicit_half_;
    TridiagonalSolver cn_;
    std::vector<double> work_;
    long taken_ = 0;
};

struct Box {
    Grid1D grid;
    Boundary left, right;
};

Box box_for(const MotionSpec& motion, double start, double half_width, int n_cells) {
    const auto& d = motion.domain;
    if (motion.kind == MotionKind::diffusion_radial) {
        const double right = std::isfinite(d.right) ? d.right : start + half_width;
        const double h = right / (n_cells + 1);
        return {Grid1D(h, right, n_cells), Boundary::reflecting, grid_boundary(d.right_boundary)};
    }
    const double left = std::isfinite(d.left) ? d.left : start - half_width;
    const double right = std::isfinite(d.right) ? d.right : start + half_width;
    return {Grid1D(left, right, n_cells), grid_boundary(d.left_boundary), grid_boundary(d.right_boundary)};
}

double initial_half_width(const MotionSpec& motion, double t, const PdeSettings& s) {
    const double speed = std::max(std::abs(motion.drift.lower()), std::abs(motion.drift.upper()));
    return std::max(s.box_half_width, speed * t + 8.0 * std::sqrt(motion.diffusion.upper() * t));
}

// Calls observe(box) on growing boxes until consecutive results agree.
template <class Observe>
auto settle_on_box(const MotionSpec& motion, double start, double t, const PdeSettings& s, Observe observe) {
    double half = initial_half_width(motion, t, s);
    int cells = s.n_cells;
    if (motion.domain.bounded()) {
        return observe(box_for(motion, start, half, cells));
    }
    // Keep the spacing of the first box when the box grows.
    const auto first = box_for(motion, start, half, cells);
    const double dx = first.grid.dx();
    auto prev = observe(first);
    for (int k = 0; k < s.max_box_doublings; ++k) {
        half *= 2.0;
        auto box = box_for(motion, start, half, cells);
        cells = static_cast<int>(std::lround((box.grid.right() - box.grid.left()) / dx));
        box = box_for(motion, start, half, cells);
        auto cur = observe(box);
        if (std::abs(cur.value - prev.value) < s.box_tolerance * std::max(1.0, std::abs(cur.value))) return cur;
        prev = cur;
    }
    return prev;
}

struct Observed {
    double value = 0.0;
    std::vector<double> logs;
    double box_width = 0.0;
};

std::vector<std::vector<double>> profiles_on(const MotionSpec& motion, const BranchField& branch, const Box& box,
                                             const std::vector<double>& times, double dt) {
    const DiscreteOperator op(box.grid, motion.diffusion, motion.drift, box.left, box.right, radial_dimension(motion));
    const auto potential = op.sample_active([&](double x) { return branch.growth(x); });
    const auto a = op.with_potential(potential);
    LinearPropagator prop(a, dt);
    std::vector<double> w(op.active_size(), 1.0);
    std::vector<std::vector<double>> out;
    double t = 0.0;
    for (double target : times) {
        const long steps = std::lround((target - t) / dt);
        if (steps < 0) throw ValidationError("profile times must be ascending");
        prop.advance(w, steps);
        t += static_cast<double>(steps) * dt;
        out.push_back(op.expand(w));
    }
    return out;
}

}  // namespace

std::vector<std::vector<double>> expected_mass_profiles(const MotionSpec& motion, const BranchField& branch,
                                                        const Grid1D& grid, const std::vector<double>& times,
                                                        double dt) {
    motion.validate();
    if (motion.kind == MotionKind::ctmc) throw ValidationError("PDE route needs a diffusion motion");
    if (!(dt > 0.0)) throw ValidationError("dt must be positive");
    const Box box{grid, grid_boundary(motion.domain.left_boundary), grid_boundary(motion.domain.right_boundary)};
    return profiles_on(motion, branch, motion.kind == MotionKind::diffusion_radial
                                           ? Box{grid, Boundary::reflecting, box.right}
                                           : box,
                       times, dt);
}

double expected_mass_pde(const MotionSpec& motion, const BranchField& branch, double start, double t,
                         const PdeSettings& settings) {
    motion.validate();
    if (motion.kind == MotionKind::ctmc) throw ValidationError("PDE route needs a diffusion motion");
    if (!motion.domain.contains(start)) throw ValidationError("start point lies outside the motion domain");
    if (t == 0.0) return 1.0;
    const auto result = settle_on_box(motion, start, t, settings, [&](const Box& box) {
        const auto prof = profiles_on(motion, branch, box, {t}, settings.dt);
        return Observed{interpolate(box.grid, prof.back(), start), {}, box.grid.right() - box.grid.left()};
    });
    return result.value;
}

namespace {

EigenvalueEstimate slope_estimate(const std::vector<double>& times, const std::vector<double>& logs) {
    const std::size_t n = times.size() - 1;
    const std::size_t half = n / 2;
    EigenvalueEstimate e;
    e.method = EigenMethod::growth_slope;
    e.value = (logs[n] - logs[half]) / (times[n] - times[half]);
    e.lower = std::numeric_limits<double>::infinity();
    e.upper = -std::numeric_limits<double>::infinity();
    for (std::size_t k = half + 1; k <= n; ++k) {
        const double s = (logs[k] - logs[k - 1]) / (times[k] - times[k - 1]);
        e.lower = std::min(e.lower, s);
        e.upper = std::max(e.upper, s);
    }
    e.lower = std::min(e.lower, e.value);
    e.upper = std::max(e.upper, e.value);
    e.metadata = {{"times", times}, {"log_mass", logs}, {"window", {times[half], times[n]}}};
    return e;
}

std::vector<double> unit_times(double t_max) {
    const long units = std::max<long>(2, std::lround(std::floor(t_max)));
    std::vector<double> times;
    for (long k = 0; k <= units; ++k) times.push_back(t_max * static_cast<double>(k) / static_cast<double>(units));
    return times;
}

}  // namespace

EigenvalueEstimate lambda_double_prime_estimate(const MotionSpec& motion, const BranchField& branch, double start,
                                                double t_max, const PdeSettings& settings) {
    motion.validate();
    if (motion.kind == MotionKind::ctmc) throw ValidationError("PDE route needs a diffusion motion");
    if (!(t_max > 0.0)) throw ValidationError("t_max must be positive");
    const auto times = unit_times(t_max);
    const auto result = settle_on_box(motion, start, t_max, settings, [&](const Box& box) {
        std::vector<double> later(times.begin() + 1, times.end());
        const auto prof = profiles_on(motion, branch, box, later, settings.dt);
        std::vector<double> logs{0.0};
        for (const auto& p : prof) logs.push_back(std::log(interpolate(box.grid, p, start)));
        const double slope = (logs.back() - logs[logs.size() / 2]) / (times.back() - times[times.size() / 2]);
        return Observed{slope, logs, box.grid.right() - box.grid.left()};
    });
    auto e = slope_estimate(times, result.logs);
    e.metadata["box_width"] = result.box_width;
    e.metadata["route"] = "pde";
    return e;
}

EigenvalueEstimate lambda_double_prime_mc(const MotionSpec& motion, const BranchField& branch, double start,
                                          double t_max, const BmpConfig& cfg, const RandomSource& rng, int threads) {
    const auto times = unit_times(t_max);
    BmpConfig c = cfg;
    c.horizon = t_max;
    c.record_interval = times[1];
    std::vector<std::vector<double>> counts(cfg.replicas);
    std::atomic<bool> capped{false};
    for_each_replica(
        motion, branch, start, c, rng,
        [&](std::size_t i, BmpRun&& r) {
            auto& row = counts[i];
            row.assign(times.size(), 0.0);
            for (std::size_t k = 0; k < r.trace.times.size(); ++k) {
                const auto idx = static_cast<std::size_t>(std::lround(r.trace.times[k] / times[1]));
                if (idx < row.size()) row[idx] = static_cast<double>(r.trace.counts[k]);
            }
            if (r.trace.terminator == Terminator::cap_hit) capped = true;
        },
        nullptr, threads);
    if (capped) throw ValidationError("population cap reached; raise cap for the Monte Carlo growth slope");
    std::vector<double> logs(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        double sum = 0.0;
        for (const auto& row : counts) sum += row[k];
        logs[k] = std::log(sum / static_cast<double>(cfg.replicas));
    }
    auto e = slope_estimate(times, logs);
    e.metadata["route"] = "monte_carlo";
    e.metadata["replicas"] = cfg.replicas;
    return e;
}

}  // namespace branchlab
