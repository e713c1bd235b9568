#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "branchlab/bmp.hpp"
#include "branchlab/estimate.hpp"
#include "branchlab/field.hpp"
#include "branchlab/motion.hpp"
#include "branchlab/random.hpp"

namespace branchlab::repro {

/// Branching or killing at rate g(x) = x^-1/2 (x >= 1) for a particle with
/// dX = 2 dt + dW, optionally perturbed by a constant epsilon of the other kind.
enum class CriticalityMode { branching_g, killing_g, branching_g_minus_eps, killing_g_plus_eps };

std::string_view to_string(CriticalityMode mode);
/// Throws ValidationError for unknown names.
CriticalityMode parse_criticality_mode(std::string_view name);

struct CriticalitySettings {
    double epsilon = 0.1;
    double start = 1.0;
    double dt = 0.05;
    std::uint64_t cap = 64;
    int threads = 0;
};

/// Motion on (-inf, 20 * horizon) with a reflecting far end.
MotionSpec criticality_motion(double horizon);
BranchField criticality_branch(CriticalityMode mode, double epsilon);

struct CriticalityPoint {
    double horizon = 0.0;
    /// Fraction of replicas alive at the horizon or stopped at the cap.
    McEstimate frequency;
    std::uint64_t cap_hits = 0;
    /// killing_g only: mean of exp(-integral_0^horizon g(X_s) ds) over the
    /// particle paths, the survival probability given the path.
    std::optional<McEstimate> conditional;
};

/// All horizons (ascending, each >= 100) are read off one set of replica runs,
/// replica i from rng.replica(i).
std::vector<CriticalityPoint> criticality_example_mc(CriticalityMode mode, const std::vector<double>& horizons,
                                                     std::uint64_t replicas, const RandomSource& rng,
                                                     const CriticalitySettings& settings = {});

}  // namespace branchlab::repro
