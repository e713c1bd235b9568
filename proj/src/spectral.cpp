#include "branchlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "branchlab/parallel.hpp"

namespace branchlab {

std::string_view to_string(EigenMethod m) {
    switch (m) {
        case EigenMethod::truncation: return "truncation";
        case EigenMethod::growth_slope: return "growth_slope";
        case EigenMethod::test_function_certificate: return "test_function_certificate";
        case EigenMethod::dense_perron: return "dense_perron";
        case EigenMethod::discretized_operator: return "discretized_operator";
    }
    return "unknown";
}

namespace {

int period_of(const SparseMatrix& m) {
    std::vector<int> level(m.n, -1);
    std::deque<std::uint32_t> queue{0};
    level[0] = 0;
    int g = 0;
    while (!queue.empty()) {
        const auto i = queue.front();
        queue.pop_front();
        for (std::size_t k = m.offsets[i]; k < m.offsets[i + 1]; ++k) {
            const auto j = m.cols[k];
            if (level[j] < 0) {
                level[j] = level[i] + 1;
                queue.push_back(j);
            } else {
                g = std::gcd(g, std::abs(level[i] + 1 - level[j]));
            }
        }
    }
    return g == 0 ? 1 : g;
}

bool power_iterate(const SparseMatrix& m, double shift, PerronResult& out) {
    std::vector<double> v(m.n, 1.0), w;
    for (long it = 1; it <= kPerronMaxIterations; ++it) {
        m.multiply(v, w);
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0, top = 0.0;
        for (std::size_t i = 0; i < m.n; ++i) {
            w[i] += shift * v[i];
            const double ratio = w[i] / v[i];
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
            top = std::max(top, w[i]);
        }
        const double rho = 0.5 * (lo + hi);
        double residual = 0.0;
        for (std::size_t i = 0; i < m.n; ++i) residual = std::max(residual, std::abs(w[i] - rho * v[i]));
        if (top == 0.0) return false;
        for (std::size_t i = 0; i < m.n; ++i) v[i] = w[i] / top;
        out.iterations = it;
        if (residual < kPerronTolerance * rho && lo > 0.0) {
            out.rho = rho - shift;
            out.lower = lo - shift;
            out.upper = hi - shift;
            out.vector = std::move(v);
            return true;
        }
    }
    return false;
}

}  // namespace

PerronResult perron(const SparseMatrix& matrix) {
    if (matrix.n == 0) throw ValidationError("empty matrix");
    if (strongly_connected_component(matrix, 0).size() != matrix.n) throw ValidationError("matrix is reducible");
    PerronResult out;
    if (matrix.n == 1) {
        const double diag = matrix.weights.empty() ? 0.0 : matrix.weights[0];
        out.rho = out.lower = out.upper = diag;
        out.vector = {1.0};
        return out;
    }
    out.period = period_of(matrix);
    if (out.period == 1 && power_iterate(matrix, 0.0, out)) return out;
    out.shifted = true;
    if (!power_iterate(matrix, 1.0, out)) {
        throw ConvergenceError("power iteration on M + I did not converge in " + std::to_string(kPerronMaxIterations) +
                               " iterations");
    }
    return out;
}

PerronResult dense_perron(const std::vector<std::vector<double>>& matrix) {
    return perron(SparseMatrix::from_dense(matrix));
}

TestFunction perron_test_function(const Truncation& truncation, StateIndex root, PerronResult* result) {
    const auto r = truncation.local(root);
    if (r < 0) throw ValidationError("root is not in the truncation");
    const auto component = strongly_connected_component(truncation.matrix(), static_cast<std::uint32_t>(r));
    const auto sub = truncation.restricted(component);
    auto p = perron(sub.matrix());
    TestFunction u;
    for (std::size_t i = 0; i < sub.size(); ++i) u[sub.state(i)] = p.vector[i];
    if (result) *result = std::move(p);
    return u;
}

TruncationSweep spectral_radius_truncation(const ExpectationKernel& kernel, StateIndex root,
                                           const std::vector<int>& depths, int threads) {
    struct Slot {
        bool usable = false;
        std::string warning;
        std::size_t states = 0, component = 0;
        PerronResult perron;
    };
    std::vector<Slot> slots(depths.size());
    parallel_for(
        depths.size(),
        [&](std::size_t k) {
            const auto t = Truncation::breadth_first(kernel, root, depths[k]);
            auto& s = slots[k];
            s.states = t.size();
            const auto comp = strongly_connected_component(t.matrix(), 0);
            s.component = comp.size();
            const auto sub = t.restricted(comp);
            if (sub.matrix().cols.empty()) {
                s.warning = "depth " + std::to_string(depths[k]) + ": root component has no cycle, skipped";
                return;
            }
            s.perron = perron(sub.matrix());
            s.usable = true;
        },
        threads);
    TruncationSweep sweep;
    for (std::size_t k = 0; k < depths.size(); ++k) {
        const auto& s = slots[k];
        if (!s.usable) {
            sweep.warnings.push_back(s.warning);
            continue;
        }
        sweep.lower_bound = std::max(sweep.lower_bound, s.perron.rho);
        EigenvalueEstimate e;
        e.value = s.perron.rho;
        e.lower = s.perron.rho;
        e.method = EigenMethod::truncation;
        e.metadata = {{"depth", depths[k]},
                      {"states", s.states},
                      {"component", s.component},
                      {"running_max", sweep.lower_bound},
                      {"collatz_wielandt", {s.perron.lower, s.perron.upper}},
                      {"iterations", s.perron.iterations},
                      {"shifted", s.perron.shifted}};
        sweep.estimates.push_back(std::move(e));
    }
    return sweep;
}

EigenvalueEstimate rho_double_prime_growth(const ExpectationKernel& kernel, StateIndex start, int n_max, std::size_t cap) {
    if (n_max < 8) throw ValidationError("rho'' growth needs n_max >= 8");
    const auto logs = log_mass_sequence(kernel, start, n_max, cap);
    std::vector<double> roots(logs.size(), 0.0);
    for (std::size_t n = 1; n < logs.size(); ++n) roots[n] = std::exp(logs[n] / static_cast<double>(n));
    const int first = (n_max + 1) / 2;
    EigenvalueEstimate e;
    e.method = EigenMethod::growth_slope;
    e.value = 0.0;
    e.lower = std::numeric_limits<double>::infinity();
    int argmax = first, argmin = first;
    for (int n = first; n <= n_max; ++n) {
        const double r = roots[static_cast<std::size_t>(n)];
        if (r > e.value) {
            e.value = r;
            argmax = n;
        }
        if (r < e.lower) {
            e.lower = r;
            argmin = n;
        }
    }
    e.upper = e.value;
    e.metadata = {{"window", {first, n_max}},
                  {"window_max_at", argmax},
                  {"window_min_at", argmin},
                  {"log_mass", logs},
                  {"root_sequence", roots}};
    return e;
}

namespace {

constexpr double kUnit = 0x1.0p-53;

double gamma(std::size_t n) {
    const double nu = static_cast<double>(n + 1) * kUnit;
    return nu / (1.0 - nu);
}

double value_of(const TestFunction& u, StateIndex s) {
    auto it = u.find(s);
    return it == u.end() ? 0.0 : it->second;
}

// Floating row sum (mu)(x) and a rigorous lower bound for the exact sum.
std::pair<double, double> row_sum(const ExpectationKernel& kernel, const TestFunction& u, StateIndex x) {
    const auto row = kernel.row(x);
    double s = 0.0;
    for (const auto& e : row) s += e.weight * value_of(u, e.to);
    return {s, s * (1.0 - gamma(row.size()))};
}

}  // namespace

TestFunctionCertificate certify_rho_prime(const ExpectationKernel& kernel, TestFunction u, double rho,
                                          const std::vector<StateIndex>& checked) {
    for (const auto& [s, v] : u) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw ValidationError("test function value " + std::to_string(v) + " at state " + std::to_string(s.id) +
                                  " is outside [0, 1]");
        }
    }
    TestFunctionCertificate cert;
    cert.rho = rho;
    cert.checked_states = checked;
    for (const auto& [s, v] : u) {
        if (v > 0.0 && std::find(checked.begin(), checked.end(), s) == checked.end()) cert.checked_states.push_back(s);
    }
    std::sort(cert.checked_states.begin(), cert.checked_states.end());
    cert.checked_states.erase(std::unique(cert.checked_states.begin(), cert.checked_states.end()),
                              cert.checked_states.end());
    cert.margin = std::numeric_limits<double>::infinity();
    cert.valid = true;
    for (StateIndex x : cert.checked_states) {
        const double ux = value_of(u, x);
        const auto [s, s_low] = row_sum(kernel, u, x);
        const double target = rho * ux;
        const double target_high = target * (1.0 + 2.0 * kUnit);
        if (s - target < cert.margin) {
            cert.margin = s - target;
            cert.worst_state = x;
        }
        if (s_low < target_high) cert.valid = false;
    }
    if (cert.checked_states.empty()) cert.margin = 0.0;
    cert.u = std::move(u);
    return cert;
}

double certifiable_rate(const ExpectationKernel& kernel, const TestFunction& u) {
    double rate = std::numeric_limits<double>::infinity();
    for (const auto& [x, ux] : u) {
        if (ux <= 0.0) continue;
        const auto [s, s_low] = row_sum(kernel, u, x);
        rate = std::min(rate, s_low / ux);
    }
    if (!std::isfinite(rate)) return 0.0;
    return rate * (1.0 - 8.0 * kUnit);
}

ReversibleReport reversible_criterion_check(const ExpectationKernel& kernel, StateIndex x0, int n_max,
                                            double growth_tolerance, double agreement_tolerance, std::size_t cap) {
    if (n_max < 8) throw ValidationError("reversible check needs n_max >= 8");
    ReversibleReport rep;
    rep.growth_tolerance = growth_tolerance;
    rep.agreement_tolerance = agreement_tolerance;
    const auto t = Truncation::breadth_first(kernel, x0, 2 * n_max, cap);
    const auto& m = t.matrix();
    // forward[y] = m^n(x0, y); backward[y] = m^n(y, x0).
    std::vector<double> forward(m.n, 0.0), backward(m.n, 0.0), next(m.n);
    forward[0] = 1.0;
    backward[0] = 1.0;
    for (int n = 1; n <= n_max; ++n) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t i = 0; i < m.n; ++i) {
            if (forward[i] == 0.0) continue;
            for (std::size_t k = m.offsets[i]; k < m.offsets[i + 1]; ++k) next[m.cols[k]] += forward[i] * m.weights[k];
        }
        forward.swap(next);
        m.multiply(backward, next);
        backward.swap(next);
        std::size_t support = 0;
        double ratio = 0.0;
        for (std::size_t y = 0; y < m.n; ++y) {
            if (forward[y] <= 0.0) continue;
            ++support;
            if (backward[y] <= 0.0) {
                if (rep.ratio_defined) {
                    rep.violation = "m^" + std::to_string(n) + "(y, x) = 0 < m^" + std::to_string(n) +
                                    "(x, y) at state " + std::to_string(t.state(y).id);
                }
                rep.ratio_defined = false;
                continue;
            }
            ratio = std::max(ratio, forward[y] / backward[y]);
        }
        rep.support.push_back(support);
        rep.max_ratio.push_back(ratio);
        rep.c.push_back(std::max(ratio, static_cast<double>(support)));
    }
    const int half = n_max / 2;
    rep.c_growth = std::exp((std::log(rep.c[static_cast<std::size_t>(n_max - 1)]) -
                             std::log(rep.c[static_cast<std::size_t>(half - 1)])) /
                            static_cast<double>(n_max - half));
    rep.hypotheses_hold = rep.ratio_defined && rep.c_growth <= 1.0 + growth_tolerance;

    const auto comp = strongly_connected_component(m, 0);
    const auto sub = t.restricted(comp);
    rep.rho_truncation = sub.matrix().cols.empty() ? 0.0 : perron(sub.matrix()).rho;
    rep.rho_growth = rho_double_prime_growth(kernel, x0, n_max, cap).value;
    rep.agree = std::abs(rep.rho_truncation - rep.rho_growth) <= agreement_tolerance;
    return rep;
}

}  // namespace branchlab
