#include "branchlab/estimate.hpp"

#include <cmath>

namespace branchlab {

McEstimate proportion(std::uint64_t successes, std::uint64_t trials) {
    if (trials == 0) return {};
    const double p = static_cast<double>(successes) / static_cast<double>(trials);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials)), trials};
}

McEstimate sample_mean(std::span<const double> values) {
    const auto n = values.size();
    if (n == 0) return {};
    // Welford, so huge counts do not lose the variance to cancellation.
    double mean = 0.0, m2 = 0.0;
    std::size_t k = 0;
    for (double v : values) {
        ++k;
        const double d = v - mean;
        mean += d / static_cast<double>(k);
        m2 += d * (v - mean);
    }
    const double var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
    return {mean, std::sqrt(var / static_cast<double>(n)), n};
}

}  // namespace branchlab
