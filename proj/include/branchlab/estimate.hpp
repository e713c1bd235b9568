#pragma once

#include <cstdint>
#include <span>

namespace branchlab {

/// Monte Carlo estimate with its standard error.
struct McEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;
    std::uint64_t replicas = 0;
};

/// Binomial proportion with standard error sqrt(p (1 - p) / n).
McEstimate proportion(std::uint64_t successes, std::uint64_t trials);

/// Sample mean with standard error s / sqrt(n), s the unbiased sample deviation.
McEstimate sample_mean(std::span<const double> values);

}  // namespace branchlab
