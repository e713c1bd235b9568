#include "branchlab/pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace branchlab {

Grid1D::Grid1D(double left, double right, int n_cells) : left_(left), right_(right), n_cells_(n_cells) {
    if (!(right > left) || !std::isfinite(left) || !std::isfinite(right)) {
        throw ValidationError("grid needs finite endpoints with left < right");
    }
    if (n_cells < 16) throw ValidationError("grid needs at least 16 cells");
    dx_ = (right - left) / n_cells;
}

void Tridiagonal::apply(std::span<const double> v, std::span<double> out) const {
    const std::size_t n = diag.size();
    for (std::size_t i = 0; i < n; ++i) {
        double s = diag[i] * v[i];
        if (i > 0) s += lower[i] * v[i - 1];
        if (i + 1 < n) s += upper[i] * v[i + 1];
        out[i] = s;
    }
}

TridiagonalSolver::TridiagonalSolver(const Tridiagonal& a, double diag_shift, double scale) {
    const std::size_t n = a.size();
    lower_.resize(n);
    inv_pivot_.resize(n);
    upper_mod_.resize(n);
    double prev_upper = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = i > 0 ? scale * a.lower[i] : 0.0;
        const double di = diag_shift + scale * a.diag[i];
        const double up = i + 1 < n ? scale * a.upper[i] : 0.0;
        const double pivot = di - lo * prev_upper;
        if (pivot == 0.0) throw ConvergenceError("singular tridiagonal system");
        lower_[i] = lo;
        inv_pivot_[i] = 1.0 / pivot;
        upper_mod_[i] = up * inv_pivot_[i];
        prev_upper = upper_mod_[i];
    }
}

void TridiagonalSolver::solve(std::span<double> rhs) const {
    const std::size_t n = inv_pivot_.size();
    double prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        rhs[i] = (rhs[i] - lower_[i] * prev) * inv_pivot_[i];
        prev = rhs[i];
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= upper_mod_[i] * rhs[i + 1];
}

DiscreteOperator::DiscreteOperator(const Grid1D& grid, const ScalarField& diffusion, const ScalarField& drift,
                                   Boundary left, Boundary right, int radial_dimension)
    : grid_(grid), left_(left), right_(right) {
    if (left == Boundary::open || right == Boundary::open) {
        throw ValidationError("grid boundaries must be dirichlet or reflecting; use a large box for open sides");
    }
    if (diffusion.lower() <= 0.0) throw ValidationError("diffusion coefficient must be uniformly positive");
    first_ = left == Boundary::dirichlet ? 1 : 0;
    last_ = right == Boundary::dirichlet ? grid.n_cells() - 1 : grid.n_cells();
    const std::size_t n = static_cast<std::size_t>(last_ - first_ + 1);
    matrix_.lower.assign(n, 0.0);
    matrix_.diag.assign(n, 0.0);
    matrix_.upper.assign(n, 0.0);
    const double dx = grid.dx();
    for (std::size_t k = 0; k < n; ++k) {
        const int i = first_ + static_cast<int>(k);
        const double x = grid.x(i);
        const double a = diffusion(x);
        double b = drift(x);
        if (radial_dimension > 1) {
            if (x <= 0.0) throw ValidationError("radial grid must start at a positive radius");
            b += a * (radial_dimension - 1) / (2.0 * x);
        }
        double lo = a / (2.0 * dx * dx) - b / (2.0 * dx);
        double up = a / (2.0 * dx * dx) + b / (2.0 * dx);
        matrix_.diag[k] = -a / (dx * dx);
        if (i == 0) {
            up += lo;  // mirror ghost v_{-1} = v_1
            lo = 0.0;
        }
        if (i == grid.n_cells()) {
            lo += up;
            up = 0.0;
        }
        matrix_.lower[k] = lo;
        matrix_.upper[k] = up;
    }
    matrix_.lower[0] = 0.0;
    matrix_.upper[n - 1] = 0.0;
}

std::vector<double> DiscreteOperator::expand(std::span<const double> active) const {
    std::vector<double> full(static_cast<std::size_t>(grid_.n_nodes()), 0.0);
    std::copy(active.begin(), active.end(), full.begin() + first_);
    return full;
}

std::vector<double> DiscreteOperator::restrict_to_active(std::span<const double> full) const {
    return {full.begin() + first_, full.begin() + last_ + 1};
}

Tridiagonal DiscreteOperator::with_potential(std::span<const double> potential_active) const {
    Tridiagonal t = matrix_;
    for (std::size_t k = 0; k < t.size(); ++k) t.diag[k] += potential_active[k];
    return t;
}

std::vector<double> DiscreteOperator::sample_active(const ScalarField& f) const {
    std::vector<double> out(active_size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = f(grid_.x(first_ + static_cast<int>(k)));
    return out;
}

std::vector<double> DiscreteOperator::sample_active(const std::function<double(double)>& f) const {
    std::vector<double> out(active_size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = f(grid_.x(first_ + static_cast<int>(k)));
    return out;
}

double interpolate(const Grid1D& grid, std::span<const double> values, double x) {
    if (x < grid.left() || x > grid.right()) return 0.0;
    const double s = (x - grid.left()) / grid.dx();
    const int i = std::min(static_cast<int>(s), grid.n_cells() - 1);
    const double w = s - i;
    return (1.0 - w) * values[static_cast<std::size_t>(i)] + w * values[static_cast<std::size_t>(i) + 1];
}

namespace {

// Number of eigenvalues of the symmetrized matrix strictly below x.
std::size_t sturm_count(const std::vector<double>& diag, const std::vector<double>& offdiag_sq, double x) {
    std::size_t count = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < diag.size(); ++i) {
        q = diag[i] - x - (i > 0 ? offdiag_sq[i - 1] / q : 0.0);
        if (q == 0.0) q = -std::numeric_limits<double>::min();
        if (q < 0.0) ++count;
    }
    return count;
}

}  // namespace

double dominant_eigenvalue(const Tridiagonal& a) {
    const std::size_t n = a.size();
    std::vector<double> offdiag_sq(n > 0 ? n - 1 : 0);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
        if (i + 1 < n) {
            offdiag_sq[i] = a.upper[i] * a.lower[i + 1];
            if (!(offdiag_sq[i] > 0.0)) {
                throw ValidationError("operator is not symmetrizable at node " + std::to_string(i) +
                                      "; refine the grid so that dx <= a/|b|");
            }
        }
        const double radius = (i > 0 ? std::sqrt(offdiag_sq[i - 1]) : 0.0) + (i + 1 < n ? std::sqrt(offdiag_sq[i]) : 0.0);
        lo = std::min(lo, a.diag[i] - radius);
        hi = std::max(hi, a.diag[i] + radius);
    }
    // The largest eigenvalue is the point where the count reaches n.
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sturm_count(a.diag, offdiag_sq, mid) >= n) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::vector<double> dominant_eigenvector(const Tridiagonal& a, double eigenvalue) {
    const std::size_t n = a.size();
    const double shift = eigenvalue + 1e-9 * std::max(1.0, std::abs(eigenvalue));
    // Inverse iteration on (A - shift I); the solver factorizes (-shift) I + A.
    TridiagonalSolver solver(a, -shift, 1.0);
    std::vector<double> v(n, 1.0);
    for (int it = 0; it < 6; ++it) {
        solver.solve(v);
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        for (double& x : v) x = std::abs(x) / m;
    }
    return v;
}

}  // namespace branchlab
