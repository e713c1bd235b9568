#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "branchlab/random.hpp"

namespace branchlab::repro {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

/// Half-open [lo, hi) with integer ends.
struct IntegerInterval {
    cpp_int lo, hi;
};

/// Alternating construction S_0 = 0, a_1 = 1, S_1 = 2, a_{n+1} = 4 S_n,
/// S_{n+1} = S_n + 2 a_{n+1}. A collects [S_n, S_n + a_{n+1}) and B collects
/// [S_n + a_{n+1}, S_{n+1}).
struct IntervalConstruction {
    std::vector<cpp_int> S;  ///< S_0..S_levels
    std::vector<cpp_int> a;  ///< a_1..a_levels stored at a[1..]; a[0] = 0
    std::vector<IntegerInterval> A, B;

    /// Interval ends for levels 0..levels-1, so S_levels is the last end point.
    static IntervalConstruction build(int levels);
    /// +1 on A, -1 on B, 0 for x < 0 and beyond S_levels.
    int sign_at(const cpp_rational& x) const;
    /// Exact integral of 1_A - 1_B over [0, t], t <= S_levels.
    cpp_rational integral_to(const cpp_rational& t) const;
};

/// 2 * 9^(n-1).
cpp_int s_closed_form(int n);

struct TimeAverages {
    cpp_rational at_s;           ///< (1/S_n) integral up to S_n
    cpp_rational at_s_plus_a;    ///< (1/(S_n + a_{n+1})) integral up to S_n + a_{n+1}
};

/// Exact time averages of 1_A - 1_B along s -> s, n >= 1.
TimeAverages interval_time_averages(int n);

/// Lebesgue measure of the union over n = 1..terms of [9^-n, 5 * 9^-n), exactly.
/// Tends to 1/2.
cpp_rational rescaled_set_measure(int terms);

struct FkEstimate {
    double horizon = 0.0;          ///< T
    double log_estimate = 0.0;     ///< log of the sample mean of the functional
    double log_standard_error = 0.0;  ///< standard error of the mean divided by the mean
    double effective_sample_size = 0.0;
    std::uint64_t replicas = 0;
    std::optional<std::string> warning;
};

struct FkSettings {
    double step = 0.05;
    /// Warn when the effective sample size falls below this fraction of the replicas.
    double ess_warning_fraction = 0.01;
    int threads = 0;
};

/// Monte Carlo of E[exp(kappa T + integral_0^T (1_A - 1_B)(X_s) ds)] for
/// X_t = sigma B_t + t, evaluated in log space. The integral is exact along the
/// piecewise-linear interpolation of the Gaussian path. `end_of_a` picks
/// T = S_n + a_{n+1}, otherwise T = S_n. Requires 1 <= n <= 3.
FkEstimate counterexample_fk_mc(double sigma, double kappa, int n, bool end_of_a, std::uint64_t replicas,
                                const RandomSource& rng, const FkSettings& settings = {});

}  // namespace branchlab::repro
