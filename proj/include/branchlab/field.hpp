#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "branchlab/offspring.hpp"
#include "branchlab/random.hpp"

namespace branchlab {

/// Real-valued coefficient field x -> f(x) on (a subset of) the real line, with
/// declared bounds. Constants take a fast path.
class ScalarField {
public:
    ScalarField(double constant = 0.0)  // NOLINT(google-explicit-constructor)
        : value_(constant), lower_(constant), upper_(constant) {}
    ScalarField(std::function<double(double)> fn, double lower, double upper);

    double operator()(double x) const { return fn_ ? fn_(x) : value_; }
    bool is_constant() const { return !fn_; }
    double lower() const { return lower_; }
    double upper() const { return upper_; }

    /// Right-continuous step function: values[i] on [breaks[i-1], breaks[i]).
    /// `values` has one more entry than `breaks`.
    static ScalarField piecewise(std::vector<double> breaks, std::vector<double> values);
    /// scale / sqrt(x) for x >= threshold (threshold > 0), 0 below.
    static ScalarField inverse_sqrt(double threshold, double scale = 1.0);
    /// `inside` on [lo, hi), `outside` elsewhere.
    static ScalarField indicator(double lo, double hi, double inside = 1.0, double outside = 0.0);

private:
    std::function<double(double)> fn_;
    double value_ = 0.0;
    double lower_ = 0.0;
    double upper_ = 0.0;
};

ScalarField operator+(const ScalarField& f, double c);

/// One term p_n(x) of a position-dependent offspring distribution.
struct OffspringComponent {
    std::uint32_t count = 0;
    ScalarField prob;
};

/// Purely local branching data: rate r(x) and offspring probabilities p_n(x).
class BranchField {
public:
    BranchField() = default;
    BranchField(ScalarField rate, std::vector<OffspringComponent> components);
    /// Position-independent law. Must not carry a displacement kernel.
    BranchField(ScalarField rate, const OffspringLaw& law);

    /// Rate-r binary splitting (p_2 = 1).
    static BranchField binary(double rate);

    double rate(double x) const { return rate_(x); }
    const ScalarField& rate_field() const { return rate_; }
    /// sup_x r(x), the thinning rate.
    double rate_bound() const { return rate_.upper(); }
    const std::vector<OffspringComponent>& components() const { return components_; }
    std::uint32_t max_count() const;

    /// p_n(x) for every component, validated to sum to 1.
    void probabilities(double x, std::vector<double>& out) const;
    std::uint32_t sample_count(double x, RandomSource& rng) const;
    /// Mean offspring m(x) = sum n p_n(x).
    double mean_offspring(double x) const;
    /// r(x) (m(x) - 1), the Feynman-Kac potential of the expectation semigroup.
    double growth(double x) const { return rate(x) * (mean_offspring(x) - 1.0); }
    /// r(x) sum p_n(x) [(1-u) - (1-u)^n].
    double nonlinearity(double u, double x) const;
    /// Upper bound on |d/du nonlinearity|, used for the monotone-iteration shift.
    double lipschitz_bound() const;

private:
    ScalarField rate_;
    std::vector<OffspringComponent> components_;
};

}  // namespace branchlab
