#include "branchlab/gw.hpp"

#include <cmath>

namespace branchlab {

std::string_view to_string(GwRegime r) {
    switch (r) {
        case GwRegime::subcritical: return "subcritical";
        case GwRegime::critical: return "critical";
        case GwRegime::supercritical: return "supercritical";
    }
    return "unknown";
}

GwExtinction solve_extinction(const OffspringLaw& law) {
    GwExtinction out;
    if (law.prob(1) == 1.0) {
        out.probability = 0.0;
        out.aitken = 0.0;
        return out;
    }
    if (law.mean() <= 1.0) {
        out.probability = 1.0;
        return out;
    }
    double prev2 = 0.0, prev = 0.0, s = 0.0;
    double step = 1.0;
    long k = 0;
    while (k < kGwMaxIterations) {
        const double next = generating_value(law, s);
        step = std::abs(next - s);
        prev2 = prev;
        prev = s;
        s = next;
        ++k;
        if (step < kGwStepTolerance) break;
    }
    out.probability = s;
    out.iterations = k;
    out.residual = step;
    out.converged = step < kGwStepTolerance || step <= kGwResidualTolerance;
    const double denom = s - 2.0 * prev + prev2;
    out.aitken = (k >= 3 && std::abs(denom) > 0.0) ? s - (s - prev) * (s - prev) / denom : s;
    return out;
}

double extinction_probability(const OffspringLaw& law) { return solve_extinction(law).probability; }

double extinction_probability_checked(const OffspringLaw& law) {
    const auto r = solve_extinction(law);
    if (!r.converged) {
        throw ConvergenceError("extinction fixed point did not converge: residual " + std::to_string(r.residual) +
                               " after " + std::to_string(r.iterations) + " iterations");
    }
    return r.probability;
}

std::vector<double> extinction_iterates(const OffspringLaw& law, int count) {
    std::vector<double> it;
    it.reserve(static_cast<std::size_t>(count));
    double s = 0.0;
    for (int k = 0; k < count; ++k) {
        it.push_back(s);
        s = generating_value(law, s);
    }
    return it;
}

GwClassification classify(const OffspringLaw& law) {
    GwClassification c;
    c.mean = law.mean();
    c.solve = solve_extinction(law);
    c.extinction_prob = c.solve.probability;
    if (c.mean > 1.0) {
        c.regime = GwRegime::supercritical;
    } else if (c.mean < 1.0) {
        c.regime = GwRegime::subcritical;
    } else {
        c.regime = GwRegime::critical;
    }
    return c;
}

}  // namespace branchlab
