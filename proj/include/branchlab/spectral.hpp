#pragma once

#include <limits>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "branchlab/kernel.hpp"

namespace branchlab {

enum class EigenMethod { truncation, growth_slope, test_function_certificate, dense_perron, discretized_operator };

std::string_view to_string(EigenMethod m);

/// A generalized eigenvalue with a bracket lower <= value <= upper and the
/// method that produced it. Unknown bounds are +-infinity.
struct EigenvalueEstimate {
    double value = 0.0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    EigenMethod method = EigenMethod::truncation;
    nlohmann::json metadata = nlohmann::json::object();
};

struct PerronResult {
    double rho = 0.0;
    /// Collatz-Wielandt bracket min_i (Mv)_i / v_i <= rho <= max_i (Mv)_i / v_i.
    double lower = 0.0;
    double upper = 0.0;
    /// Positive right eigenvector with max entry 1.
    std::vector<double> vector;
    long iterations = 0;
    /// Power iteration ran on M + I (periodic or slowly mixing input).
    bool shifted = false;
    int period = 1;
};

inline constexpr long kPerronMaxIterations = 100000;
inline constexpr double kPerronTolerance = 1e-12;

/// Perron root and vector of a nonnegative irreducible matrix by power iteration
/// until ||Mv - rho v||_inf < 1e-12 rho. Periodic matrices (and any matrix that
/// does not settle) are iterated as M + I. Throws ValidationError for reducible
/// input and ConvergenceError when even the shifted iteration does not settle.
PerronResult perron(const SparseMatrix& matrix);
PerronResult dense_perron(const std::vector<std::vector<double>>& matrix);

struct TruncationSweep {
    /// One estimate per usable truncation: value = lower = rho_c(m_F), upper
    /// unknown. metadata holds depth, states, component size and the running max.
    std::vector<EigenvalueEstimate> estimates;
    std::vector<std::string> warnings;
    /// Running max over the sweep: a lower bracket for rho_c.
    double lower_bound = 0.0;
};

/// Perron roots of the strongly connected component of `root` inside the
/// breadth-first truncations of the given depths. Truncations whose root
/// component carries no cycle are skipped with a warning.
TruncationSweep spectral_radius_truncation(const ExpectationKernel& kernel, StateIndex root,
                                           const std::vector<int>& depths, int threads = 0);

/// Growth-slope estimate of rho'' from a_n = E_start[N_n], n <= n_max.
/// value = max and lower = min of a_n^(1/n) over the window [n_max/2, n_max];
/// metadata carries the full sequence of a_n^(1/n).
EigenvalueEstimate rho_double_prime_growth(const ExpectationKernel& kernel, StateIndex start, int n_max,
                                           std::size_t cap = 1u << 22);

using TestFunction = std::unordered_map<StateIndex, double>;

struct TestFunctionCertificate {
    TestFunction u;
    double rho = 0.0;
    std::vector<StateIndex> checked_states;
    /// min over checked states of (mu)(x) - rho u(x), in floating point.
    double margin = 0.0;
    StateIndex worst_state;
    /// (mu)(x) >= rho u(x) holds at every checked state after accounting for
    /// rounding in the row sums.
    bool valid = false;
};

/// Pointwise check of m u >= rho u on `checked` together with the support of u.
/// u vanishes off its map. Throws ValidationError when u leaves [0, 1].
TestFunctionCertificate certify_rho_prime(const ExpectationKernel& kernel, TestFunction u, double rho,
                                          const std::vector<StateIndex>& checked);

/// Largest rate that certify_rho_prime() accepts for u, up to a few ulps: a
/// rounding-safe min over the support of u of (mu)(x) / u(x).
double certifiable_rate(const ExpectationKernel& kernel, const TestFunction& u);

/// Perron vector of the root component of a truncation, extended by zero.
TestFunction perron_test_function(const Truncation& truncation, StateIndex root, PerronResult* result = nullptr);

struct ReversibleReport {
    std::vector<double> c;            ///< c_n = max(max_y m^n(x,y)/m^n(y,x), |A_n|), n = 1..n_max
    std::vector<std::size_t> support; ///< |A_n|
    std::vector<double> max_ratio;
    bool ratio_defined = true;        ///< false once some m^n(y,x) = 0 < m^n(x,y)
    std::string violation;
    double c_growth = 0.0;            ///< windowed estimate of limsup c_n^(1/n)
    bool hypotheses_hold = false;
    double rho_truncation = 0.0;
    double rho_growth = 0.0;
    bool agree = false;
    double growth_tolerance = 0.0;
    double agreement_tolerance = 0.0;
};

/// Checks the reversibility-type hypothesis on the depth-2 n_max truncation and
/// compares the truncation Perron root with the growth-slope estimate.
ReversibleReport reversible_criterion_check(const ExpectationKernel& kernel, StateIndex x0, int n_max,
                                            double growth_tolerance = 0.05, double agreement_tolerance = 0.02,
                                            std::size_t cap = 1u << 22);

}  // namespace branchlab
