#pragma once

#include <span>
#include <vector>

#include "branchlab/field.hpp"

namespace branchlab {

enum class Boundary { dirichlet, reflecting, open };

/// Uniform grid with nodes x_i = left + i dx, i = 0..n_cells.
class Grid1D {
public:
    Grid1D(double left, double right, int n_cells);

    double left() const { return left_; }
    double right() const { return right_; }
    int n_cells() const { return n_cells_; }
    int n_nodes() const { return n_cells_ + 1; }
    double dx() const { return dx_; }
    double x(int i) const { return left_ + i * dx_; }
    /// Grid with twice as many cells over the same span.
    Grid1D refined() const { return Grid1D(left_, right_, 2 * n_cells_); }

private:
    double left_;
    double right_;
    int n_cells_;
    double dx_;
};

/// Tridiagonal matrix: (A v)_i = lower[i] v_{i-1} + diag[i] v_i + upper[i] v_{i+1}.
struct Tridiagonal {
    std::vector<double> lower, diag, upper;

    std::size_t size() const { return diag.size(); }
    void apply(std::span<const double> v, std::span<double> out) const;
};

/// Factorized (diag_shift * I + scale * A) for repeated solves.
class TridiagonalSolver {
public:
    TridiagonalSolver(const Tridiagonal& a, double diag_shift, double scale);
    void solve(std::span<double> rhs) const;

private:
    std::vector<double> lower_, inv_pivot_, upper_mod_;
};

/// Central-difference discretization of L0 = (a/2) d^2 + b d (plus the radial
/// term a (d-1)/(2x) d when radial_dimension > 1) on the active nodes of a grid.
/// Dirichlet nodes are held at zero and excluded; reflecting sides use a mirror
/// ghost node.
class DiscreteOperator {
public:
    DiscreteOperator(const Grid1D& grid, const ScalarField& diffusion, const ScalarField& drift,
                     Boundary left, Boundary right, int radial_dimension = 1);

    const Grid1D& grid() const { return grid_; }
    const Tridiagonal& matrix() const { return matrix_; }
    int first_node() const { return first_; }
    int last_node() const { return last_; }
    std::size_t active_size() const { return matrix_.size(); }

    /// Full-grid field (Dirichlet nodes zero) from active values, and back.
    std::vector<double> expand(std::span<const double> active) const;
    std::vector<double> restrict_to_active(std::span<const double> full) const;
    /// Matrix of L0 + diag(potential) on the active nodes.
    Tridiagonal with_potential(std::span<const double> potential_active) const;
    /// Potential sampled at the active nodes.
    std::vector<double> sample_active(const ScalarField& f) const;
    std::vector<double> sample_active(const std::function<double(double)>& f) const;

private:
    Grid1D grid_;
    Boundary left_, right_;
    int first_ = 0, last_ = 0;
    Tridiagonal matrix_;
};

/// Linear interpolation of a full-grid field at x (zero outside the grid).
double interpolate(const Grid1D& grid, std::span<const double> values, double x);

/// Largest eigenvalue of a tridiagonal matrix whose off-diagonal products
/// lower[i+1]*upper[i] are positive (similar to a symmetric matrix), by Sturm
/// bisection. Throws ValidationError if some product is not positive.
double dominant_eigenvalue(const Tridiagonal& a);

/// Positive eigenvector for dominant_eigenvalue(), normalized to max entry 1.
std::vector<double> dominant_eigenvector(const Tridiagonal& a, double eigenvalue);

}  // namespace branchlab
