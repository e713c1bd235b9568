#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "branchlab/field.hpp"
#include "branchlab/pde.hpp"
#include "branchlab/random.hpp"

namespace branchlab {

enum class MotionKind { diffusion_1d, diffusion_radial, ctmc };

/// Domain of a one-dimensional motion. Infinite endpoints must be open.
struct Interval {
    double left = -std::numeric_limits<double>::infinity();
    double right = std::numeric_limits<double>::infinity();
    Boundary left_boundary = Boundary::open;
    Boundary right_boundary = Boundary::open;

    static Interval dirichlet(double left, double right) {
        return {left, right, Boundary::dirichlet, Boundary::dirichlet};
    }
    static Interval whole_line() { return {}; }
    bool contains(double x) const;
    bool bounded() const;
};

/// Jump rates of a finite continuous-time Markov chain on states 0..n-1.
/// A jump to a negative target kills the particle.
struct CtmcRates {
    std::vector<std::vector<std::pair<int, double>>> jumps;

    double exit_rate(int state) const;
};

/// Single-particle motion: dX = b(X) dt + sqrt(a(X)) dW on an interval, its
/// radial reduction in `dimension` dimensions (radius in [0, right)), or a
/// finite CTMC whose state index is stored as the position.
struct MotionSpec {
    MotionKind kind = MotionKind::diffusion_1d;
    ScalarField drift = 0.0;
    ScalarField diffusion = 1.0;
    Interval domain;
    int dimension = 1;
    CtmcRates ctmc;

    static MotionSpec brownian(Interval domain, double drift = 0.0, double diffusion = 1.0);
    /// Throws ValidationError when the motion breaks its invariants.
    void validate() const;
};

/// Moves one particle over a time span, applying boundary killing with the
/// Brownian-bridge exit correction exp(-2 d0 d1 / (a h)) on Dirichlet sides
/// and mirroring on reflecting sides.
class MotionStepper {
public:
    explicit MotionStepper(const MotionSpec& spec);

    /// Advances x by h. Returns false when the particle is killed.
    bool advance(double& x, double h, RandomSource& rng) const;

private:
    bool advance_diffusion(double& x, double h, RandomSource& rng) const;
    bool advance_radial(double& x, double h, RandomSource& rng) const;
    bool advance_ctmc(double& x, double h, RandomSource& rng) const;
    bool survives_bridge(double x0, double x1, double a, double h, RandomSource& rng) const;

    const MotionSpec* spec_;
};

}  // namespace branchlab
