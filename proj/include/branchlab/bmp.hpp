#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "branchlab/estimate.hpp"
#include "branchlab/field.hpp"
#include "branchlab/motion.hpp"
#include "branchlab/random.hpp"
#include "branchlab/skeleton.hpp"
#include "branchlab/spectral.hpp"
#include "branchlab/trace.hpp"

namespace branchlab {

struct BmpConfig {
    double dt = 0.01;
    double horizon = 1.0;
    std::uint64_t cap = 1000000;
    std::uint64_t replicas = 1000;
    std::uint64_t seed = 0;
    /// Spacing of trace records; the horizon is always recorded.
    double record_interval = 1.0;

    void validate() const;
};

struct Particle {
    double x = 0.0;
    /// Remaining time to the next thinning event at rate sup r.
    double clock = 0.0;
    /// Skeleton family the particle belongs to, or kNoFamily.
    std::uint32_t family = 0;
};

inline constexpr std::uint32_t kNoFamily = 0xffffffffu;

/// Living particles at a common time.
struct ParticleSystem {
    double time = 0.0;
    std::vector<Particle> particles;

    std::size_t size() const { return particles.size(); }
    std::size_t count_in(double lo, double hi) const;
};

struct BmpRun {
    PopulationTrace trace;
    ParticleSystem final;
    /// Integral of N_t over the simulated time.
    double total_mass = 0.0;
    /// Full and skeleton counts at integer times (skeleton runs only).
    std::vector<std::uint64_t> integer_counts;
    std::vector<std::uint64_t> skeleton_counts;
};

/// One realization. Particles move by MotionStepper in steps of dt; within a
/// step, thinning events at rate sup r are resolved exactly in time and
/// accepted with probability r(x) / sup r at the particle's position. Stops at
/// the horizon, at extinction, or once N >= cap. When `skeleton` is given, the
/// time-one skeleton is tracked along the same randomness (1/dt must be an integer).
BmpRun simulate_bmp(const MotionSpec& motion, const BranchField& branch, double start, const BmpConfig& cfg,
                    RandomSource& rng, const SkeletonSpec* skeleton = nullptr);

/// Runs cfg.replicas independent replicas (replica i from rng.replica(i)) and
/// hands each finished run to `visit` (called from worker threads with the
/// replica index; write only to per-index slots).
void for_each_replica(const MotionSpec& motion, const BranchField& branch, double start, const BmpConfig& cfg,
                      const RandomSource& rng, const std::function<void(std::size_t, BmpRun&&)>& visit,
                      const SkeletonSpec* skeleton = nullptr, int threads = 0);

struct BmpSurvival {
    McEstimate survival;
    std::uint64_t cap_hits = 0;
};

/// Fraction of replicas alive at the horizon or stopped at the cap.
BmpSurvival bmp_survival_mc(const MotionSpec& motion, const BranchField& branch, double start, const BmpConfig& cfg,
                            const RandomSource& rng, int threads = 0);

/// Sample mean of N at the horizon. Throws ValidationError when a replica hits the cap.
McEstimate mass_mc(const MotionSpec& motion, const BranchField& branch, double start, const BmpConfig& cfg,
                   const RandomSource& rng, int threads = 0);

struct TotalMassReport {
    McEstimate mass;
    std::uint64_t censored = 0;
    std::optional<std::string> warning;
};

/// Mean of the integral of N_t until extinction; replicas still alive at the
/// horizon are censored, with a warning above 1%.
TotalMassReport total_mass_estimate(const MotionSpec& motion, const BranchField& branch, double start,
                                    const BmpConfig& cfg, const RandomSource& rng, int threads = 0);

/// Fraction of replicas with at least one particle in [lo, hi] at the horizon.
/// Capped replicas count as occupying the window only if a particle is there.
McEstimate local_survival_mc(const MotionSpec& motion, const BranchField& branch, double start, double lo, double hi,
                             const BmpConfig& cfg, const RandomSource& rng, int threads = 0);

/// Finite-difference settings for the deterministic expectation solves.
struct PdeSettings {
    int n_cells = 400;
    double dt = 0.005;
    /// Half-width of the initial box around the start point on open sides.
    double box_half_width = 20.0;
    /// Box doubling stops once the observable changes by less than this.
    double box_tolerance = 1e-6;
    int max_box_doublings = 8;
};

/// E_start[N_t] by Crank-Nicolson on dw/dt = (a/2) w'' + b w' + r (m - 1) w,
/// w(., 0) = 1, with the domain's boundary conditions. Open sides use a
/// Dirichlet box that doubles until the value settles.
double expected_mass_pde(const MotionSpec& motion, const BranchField& branch, double start, double t,
                         const PdeSettings& settings = {});

/// Expected mass on the full grid at each requested time (ascending), for a
/// bounded domain given as a grid and boundary types.
std::vector<std::vector<double>> expected_mass_profiles(const MotionSpec& motion, const BranchField& branch,
                                                        const Grid1D& grid, const std::vector<double>& times,
                                                        double dt);

/// Growth slope (1/t) log E_start[N_t] over [t_max/2, t_max] from the PDE.
/// value = secant slope; lower / upper = min / max of the unit-time local
/// slopes in the window.
EigenvalueEstimate lambda_double_prime_estimate(const MotionSpec& motion, const BranchField& branch, double start,
                                                double t_max, const PdeSettings& settings = {});

/// Same quantity from Monte Carlo means of N_t at unit times.
EigenvalueEstimate lambda_double_prime_mc(const MotionSpec& motion, const BranchField& branch, double start,
                                          double t_max, const BmpConfig& cfg, const RandomSource& rng,
                                          int threads = 0);

}  // namespace branchlab
