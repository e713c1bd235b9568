#include "branchlab/repro/intervals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "branchlab/parallel.hpp"
#include "branchlab/types.hpp"

namespace branchlab::repro {

IntervalConstruction IntervalConstruction::build(int levels) {
    if (levels < 1 || levels > 64) throw ValidationError("interval construction needs 1 <= levels <= 64");
    IntervalConstruction c;
    c.S.push_back(0);
    c.a.push_back(0);
    for (int n = 0; n < levels; ++n) {
        const cpp_int a_next = n == 0 ? cpp_int(1) : cpp_int(4 * c.S[static_cast<std::size_t>(n)]);
        const cpp_int& s = c.S[static_cast<std::size_t>(n)];
        c.a.push_back(a_next);
        c.A.push_back({s, s + a_next});
        c.B.push_back({s + a_next, s + 2 * a_next});
        c.S.push_back(s + 2 * a_next);
    }
    return c;
}

int IntervalConstruction::sign_at(const cpp_rational& x) const {
    if (x < 0) return 0;
    for (std::size_t k = 0; k < A.size(); ++k) {
        if (x < cpp_rational(A[k].hi)) return 1;
        if (x < cpp_rational(B[k].hi)) return -1;
    }
    return 0;
}

cpp_rational IntervalConstruction::integral_to(const cpp_rational& t) const {
    if (t > cpp_rational(S.back())) throw ValidationError("integral beyond the constructed levels");
    cpp_rational total = 0;
    for (std::size_t k = 0; k < A.size() && t > cpp_rational(A[k].lo); ++k) {
        total += std::min(t, cpp_rational(A[k].hi)) - cpp_rational(A[k].lo);
        if (t > cpp_rational(B[k].lo)) total -= std::min(t, cpp_rational(B[k].hi)) - cpp_rational(B[k].lo);
    }
    return total;
}

cpp_int s_closed_form(int n) {
    if (n < 1) throw ValidationError("closed form needs n >= 1");
    return 2 * boost::multiprecision::pow(cpp_int(9), static_cast<unsigned>(n - 1));
}

TimeAverages interval_time_averages(int n) {
    if (n < 1) throw ValidationError("time averages need n >= 1");
    const auto c = IntervalConstruction::build(n + 1);
    const cpp_rational s(c.S[static_cast<std::size_t>(n)]);
    const cpp_rational sa = s + cpp_rational(c.a[static_cast<std::size_t>(n + 1)]);
    return {c.integral_to(s) / s, c.integral_to(sa) / sa};
}

cpp_rational rescaled_set_measure(int terms) {
    if (terms < 1) throw ValidationError("measure needs at least one term");
    cpp_rational total = 0;
    cpp_int nine = 1;
    for (int n = 1; n <= terms; ++n) {
        nine *= 9;
        total += cpp_rational(cpp_int(4), nine);
    }
    return total;
}

namespace {

/// Double-precision view of the construction for path integrals.
struct Potential {
    std::vector<double> starts, mids, ends;  // A = [start, mid), B = [mid, end)

    explicit Potential(const IntervalConstruction& c) {
        for (std::size_t k = 0; k < c.A.size(); ++k) {
            starts.push_back(c.A[k].lo.convert_to<double>());
            mids.push_back(c.A[k].hi.convert_to<double>());
            ends.push_back(c.B[k].hi.convert_to<double>());
        }
    }

    /// Integral of 1_A - 1_B over [0, x]; 0 for x <= 0, and constant past the last end.
    double antiderivative(double x) const {
        if (x <= 0.0) return 0.0;
        const auto k = static_cast<std::size_t>(std::upper_bound(starts.begin(), starts.end(), x) - starts.begin()) - 1;
        const double into = x - starts[k];
        const double width = mids[k] - starts[k];
        if (x < mids[k]) return into;
        if (x < ends[k]) return width - (x - mids[k]);
        return 0.0;
    }

    double value(double x) const {
        if (x < 0.0) return 0.0;
        const auto k = static_cast<std::size_t>(std::upper_bound(starts.begin(), starts.end(), x) - starts.begin()) - 1;
        if (x < mids[k]) return 1.0;
        if (x < ends[k]) return -1.0;
        return 0.0;
    }

    /// Exact integral over time h of the potential along the segment x0 -> x1.
    double segment(double x0, double x1, double h) const {
        if (x0 == x1) return h * value(x0);
        return h * (antiderivative(x1) - antiderivative(x0)) / (x1 - x0);
    }
};

}  // namespace

FkEstimate counterexample_fk_mc(double sigma, double kappa, int n, bool end_of_a, std::uint64_t replicas,
                                const RandomSource& rng, const FkSettings& settings) {
    if (n < 1 || n > 3) throw ValidationError("Feynman-Kac Monte Carlo needs 1 <= n <= 3");
    if (!(sigma >= 0.0)) throw ValidationError("sigma must be nonnegative");
    if (replicas == 0) throw ValidationError("replicas must be positive");
    if (!(settings.step > 0.0)) throw ValidationError("step must be positive");
    // Two extra levels keep every path far from the end of the construction.
    const auto c = IntervalConstruction::build(n + 3);
    const Potential potential(c);
    const auto idx = static_cast<std::size_t>(n);
    const cpp_int t_exact = end_of_a ? cpp_int(c.S[idx] + c.a[idx + 1]) : c.S[idx];
    const double horizon = t_exact.convert_to<double>();
    if (potential.ends.back() < horizon + 40.0 * sigma * std::sqrt(horizon) + 1.0) {
        throw ValidationError("path would leave the constructed levels");
    }

    FkEstimate out;
    out.horizon = horizon;
    out.replicas = replicas;
    std::vector<double> logs(replicas);
    if (sigma == 0.0) {
        const double integral = c.integral_to(cpp_rational(t_exact)).convert_to<double>();
        std::fill(logs.begin(), logs.end(), kappa * horizon + integral);
    } else {
        const auto steps = static_cast<std::uint64_t>(std::ceil(horizon / settings.step));
        const double h = horizon / static_cast<double>(steps);
        const double noise = sigma * std::sqrt(h);
        parallel_for(
            replicas,
            [&](std::size_t i) {
                auto local = rng.replica(i);
                double x = 0.0, integral = 0.0;
                for (std::uint64_t k = 0; k < steps; ++k) {
                    const double next = x + h + noise * local.normal();
                    integral += potential.segment(x, next, h);
                    x = next;
                }
                logs[i] = kappa * horizon + integral;
            },
            settings.threads);
    }

    // Streaming log-sum-exp of the functional and of its square.
    double top = -std::numeric_limits<double>::infinity();
    for (double l : logs) top = std::max(top, l);
    double s1 = 0.0, s2 = 0.0;
    for (double l : logs) {
        const double w = std::exp(l - top);
        s1 += w;
        s2 += w * w;
    }
    const auto r = static_cast<double>(replicas);
    out.log_estimate = top + std::log(s1 / r);
    out.effective_sample_size = s1 * s1 / s2;
    if (replicas > 1) {
        const double mean = s1 / r;
        const double var = std::max(0.0, (s2 / r - mean * mean) * r / (r - 1.0));
        out.log_standard_error = std::sqrt(var / r) / mean;
    }
    if (out.effective_sample_size < settings.ess_warning_fraction * r) {
        out.warning = "effective sample size " + std::to_string(out.effective_sample_size) + " of " +
                      std::to_string(replicas) + " replicas; the estimate is dominated by a few paths";
    }
    return out;
}

}  // namespace branchlab::repro
