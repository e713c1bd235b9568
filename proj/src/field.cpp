#include "branchlab/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace branchlab {

ScalarField::ScalarField(std::function<double(double)> fn, double lower, double upper)
    : fn_(std::move(fn)), lower_(lower), upper_(upper) {
    if (!(lower <= upper)) throw ValidationError("scalar field bounds are inverted");
}

ScalarField ScalarField::piecewise(std::vector<double> breaks, std::vector<double> values) {
    if (values.size() != breaks.size() + 1) {
        throw ValidationError("piecewise field needs one more value than breakpoints");
    }
    if (!std::is_sorted(breaks.begin(), breaks.end())) throw ValidationError("piecewise breakpoints must ascend");
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double lower = *lo, upper = *hi;
    return ScalarField(
        [breaks = std::move(breaks), values = std::move(values)](double x) {
            const auto it = std::upper_bound(breaks.begin(), breaks.end(), x);
            return values[static_cast<std::size_t>(it - breaks.begin())];
        },
        lower, upper);
}

ScalarField ScalarField::inverse_sqrt(double threshold, double scale) {
    if (!(threshold > 0.0)) throw ValidationError("inverse_sqrt threshold must be positive");
    return ScalarField([threshold, scale](double x) { return x >= threshold ? scale / std::sqrt(x) : 0.0; },
                       std::min(0.0, scale / std::sqrt(threshold)), std::max(0.0, scale / std::sqrt(threshold)));
}

ScalarField ScalarField::indicator(double lo, double hi, double inside, double outside) {
    return ScalarField([=](double x) { return (x >= lo && x < hi) ? inside : outside; }, std::min(inside, outside),
                       std::max(inside, outside));
}

ScalarField operator+(const ScalarField& f, double c) {
    if (f.is_constant()) return ScalarField(f(0.0) + c);
    return ScalarField([f, c](double x) { return f(x) + c; }, f.lower() + c, f.upper() + c);
}

BranchField::BranchField(ScalarField rate, std::vector<OffspringComponent> components)
    : rate_(std::move(rate)), components_(std::move(components)) {
    if (rate_.lower() < 0.0) throw ValidationError("branching rate must be nonnegative");
    if (!std::isfinite(rate_.upper())) throw ValidationError("branching rate must be bounded");
    if (components_.empty() && rate_.upper() > 0.0) throw ValidationError("positive branching rate without offspring law");
    for (const auto& c : components_) {
        if (c.prob.lower() < 0.0) throw ValidationError("offspring probability field takes negative values");
    }
    std::sort(components_.begin(), components_.end(),
              [](const OffspringComponent& a, const OffspringComponent& b) { return a.count < b.count; });
}

BranchField::BranchField(ScalarField rate, const OffspringLaw& law) : rate_(std::move(rate)) {
    if (law.displacement()) throw ValidationError("continuous-time branching must be purely local");
    for (const auto& o : law.outcomes()) components_.push_back({o.count, ScalarField(o.prob)});
    if (rate_.lower() < 0.0) throw ValidationError("branching rate must be nonnegative");
}

BranchField BranchField::binary(double rate) { return BranchField(ScalarField(rate), OffspringLaw::deterministic(2)); }

std::uint32_t BranchField::max_count() const {
    std::uint32_t m = 0;
    for (const auto& c : components_) m = std::max(m, c.count);
    return m;
}

void BranchField::probabilities(double x, std::vector<double>& out) const {
    out.resize(components_.size());
    double total = 0.0;
    for (std::size_t i = 0; i < components_.size(); ++i) {
        out[i] = components_[i].prob(x);
        total += out[i];
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ValidationError("offspring probabilities at x=" + std::to_string(x) + " sum to " + std::to_string(total));
    }
}

std::uint32_t BranchField::sample_count(double x, RandomSource& rng) const {
    if (components_.size() == 1) return components_.front().count;
    double u = rng.uniform();
    for (const auto& c : components_) {
        const double p = c.prob(x);
        if (u < p) return c.count;
        u -= p;
    }
    return components_.back().count;
}

double BranchField::mean_offspring(double x) const {
    double m = 0.0;
    for (const auto& c : components_) m += c.count * c.prob(x);
    return m;
}

double BranchField::nonlinearity(double u, double x) const {
    if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("nonlinearity: u must lie in [0, 1]");
    const double r = rate(x);
    if (r == 0.0) return 0.0;
    const double v = 1.0 - u;
    double sum = 0.0;
    for (const auto& c : components_) {
        const double p = c.prob(x);
        if (p == 0.0) continue;
        sum += p * (v - std::pow(v, static_cast<double>(c.count)));
    }
    return r * sum;
}

double BranchField::lipschitz_bound() const {
    // d/du of the nonlinearity lies in [-r, r (m - 1)].
    double mean_bound = 0.0;
    for (const auto& c : components_) mean_bound += c.count * c.prob.upper();
    return rate_.upper() * std::max(1.0, mean_bound - 1.0);
}

}  // namespace branchlab
