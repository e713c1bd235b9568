#pragma once

#include <optional>
#include <string>
#include <vector>

#include "branchlab/bmp.hpp"
#include "branchlab/field.hpp"
#include "branchlab/pde.hpp"
#include "branchlab/spectral.hpp"

namespace branchlab {

/// dy/dt = (a/2) y'' + b y' + f(y, x) on a grid with zero Dirichlet data (or
/// reflecting sides), y(., 0) = initial.
struct FkppProblem {
    Grid1D grid{0.0, 1.0, 16};
    ScalarField diffusion = 1.0;
    ScalarField drift = 0.0;
    BranchField branch;
    Boundary left = Boundary::dirichlet;
    Boundary right = Boundary::dirichlet;
    ScalarField initial = 0.0;
    int radial_dimension = 1;

    DiscreteOperator discretize() const;
    /// Motion of a single particle of the dual branching process.
    MotionSpec motion() const;
};

/// r(x) sum_n p_n(x) [(1 - u) - (1 - u)^n]. Throws std::domain_error outside [0, 1].
double nonlinearity(const FkppProblem& problem, double u, double x);

struct ParabolicSolution {
    std::vector<double> times;
    /// Full-grid fields at `times`.
    std::vector<std::vector<double>> fields;
    /// Largest amount any value was moved back into [0, 1] in one step.
    double max_clamp = 0.0;
    long steps = 0;
};

inline constexpr double kClampTolerance = 1e-8;

/// IMEX Crank-Nicolson / Adams-Bashforth 2 with implicit Euler startup steps.
/// Requires dt sup r <= 0.1. Fields are recorded at t_end and at the optional
/// ascending `snapshots`. Throws InstabilityError if a clamp exceeds 1e-8.
ParabolicSolution solve_parabolic(const FkppProblem& problem, double t_end, double dt,
                                  const std::vector<double>& snapshots = {});

struct StationaryResult {
    std::vector<double> field;
    long sweeps = 0;
    double step = 0.0;          ///< final sup-norm change
    double residual = 0.0;      ///< sup |L0 u + f(u)| on active nodes
    double shift = 0.0;
    double linear_growth = 0.0; ///< top eigenvalue of the linearization at 0
    bool degenerate = false;    ///< returned the zero field
};

inline constexpr long kMaxMonotoneSweeps = 10000;

/// Monotone iteration (C - L0) w_{k+1} = f(w_k) + C w_k from 1e-6 times the
/// Perron mode of the linearization at 0 (the zero field when its eigenvalue
/// is <= 0). shift <= 0 selects 1.1 times the Lipschitz bound. Throws
/// ConvergenceError after 10^4 sweeps or if an iterate decreases.
StationaryResult stationary_monotone(const FkppProblem& problem, double shift = 0.0, double tol = 1e-12);

struct LongtimeResult {
    std::vector<double> field;
    double t_end = 0.0;
    double change = 0.0;        ///< sup |y(t_end) - y(t_end / 2)|
    bool settled = false;
    std::optional<std::string> warning;
};

/// Long-time limit of solve_parabolic from the initial datum 1.
LongtimeResult maximal_stationary_via_longtime(const FkppProblem& problem, double t_end, double dt,
                                               double tol = 1e-8);

/// sup |L0 u + f(u)| over active nodes.
double stationary_residual(const FkppProblem& problem, const std::vector<double>& field);

struct DualityPoint {
    double x = 0.0;
    double pde = 0.0;
    McEstimate mc;
    double standardized = 0.0;
};

struct DualityReport {
    std::vector<DualityPoint> points;
    double max_standardized = 0.0;
};

struct DualitySettings {
    double t = 2.0;
    std::uint64_t replicas = 100000;
    int points = 9;
    double pde_dt = 1e-3;
    double particle_dt = 0.01;
    std::uint64_t seed = 0;
};

/// Compares solve_parabolic at (x, t) with a particle estimate of
/// 1 - E prod (1 - g(X_i(t))) at equally spaced interior points, for each initial
/// datum g. The same particle configurations serve every g. Standard errors are
/// floored at 1/replicas.
std::vector<DualityReport> mckean_duality_check(const FkppProblem& problem, const std::vector<ScalarField>& data,
                                                const DualitySettings& settings, int threads = 0);

/// Dominant eigenvalue of the discretized L0 + c with the problem's boundary
/// conditions, Richardson-extrapolated from n and 2n cells.
EigenvalueEstimate principal_eigenvalue_1d(const FkppProblem& problem, const ScalarField& potential);

}  // namespace branchlab
