#pragma once

#include <string_view>
#include <vector>

#include "branchlab/offspring.hpp"

namespace branchlab {

enum class GwRegime { subcritical, critical, supercritical };

std::string_view to_string(GwRegime r);

/// Result of the extinction fixed-point solve.
struct GwExtinction {
    double probability = 1.0;   ///< minimal fixed point q of s -> f(s)
    long iterations = 0;
    double residual = 0.0;      ///< |s_{k+1} - s_k| at exit
    bool converged = true;
    double aitken = 1.0;        ///< Aitken delta-squared extrapolation of the last three iterates
};

struct GwClassification {
    double mean = 0.0;
    GwRegime regime = GwRegime::critical;
    double extinction_prob = 1.0;
    GwExtinction solve;
};

inline constexpr long kGwMaxIterations = 100000;
inline constexpr double kGwStepTolerance = 1e-14;
inline constexpr double kGwResidualTolerance = 1e-10;

/// Minimal fixed point of the generating function.
///
/// For mean <= 1 (and p_1 != 1) the answer is exactly 1 and for p_1 = 1 it is 0;
/// otherwise s_{k+1} = f(s_k) is iterated from s_0 = 0 until the step drops
/// below 1e-14 or the iteration cap is hit. Hitting the cap with a step above
/// 1e-10 leaves `converged == false`; callers that need a hard failure use
/// extinction_probability_checked().
GwExtinction solve_extinction(const OffspringLaw& law);

/// The probability itself.
double extinction_probability(const OffspringLaw& law);

/// Like extinction_probability() but throws ConvergenceError when the iteration did not settle.
double extinction_probability_checked(const OffspringLaw& law);

/// First `count` iterates s_0 = 0, s_1 = f(0), ... of the monotone scheme.
std::vector<double> extinction_iterates(const OffspringLaw& law, int count);

GwClassification classify(const OffspringLaw& law);

}  // namespace branchlab
