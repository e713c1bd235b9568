#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <unordered_map>
#include <vector>

#include "branchlab/types.hpp"

namespace branchlab {

/// Sparse nonnegative expectation kernel m(x, y), materialized row by row from a
/// procedural factory so infinite state spaces can be explored lazily.
class ExpectationKernel {
public:
    using RowFactory = std::function<void(StateIndex, std::vector<KernelEntry>&)>;

    explicit ExpectationKernel(RowFactory factory) : factory_(std::move(factory)) {}

    /// Row of x with duplicate targets merged and zero weights dropped, sorted by
    /// target. Throws ValidationError on negative or non-finite weights.
    std::vector<KernelEntry> row(StateIndex x) const;

private:
    RowFactory factory_;
};

/// Compressed sparse rows over local indices 0..n-1.
struct SparseMatrix {
    std::size_t n = 0;
    std::vector<std::size_t> offsets{0};
    std::vector<std::uint32_t> cols;
    std::vector<double> weights;

    void multiply(const std::vector<double>& v, std::vector<double>& out) const;
    static SparseMatrix from_dense(const std::vector<std::vector<double>>& dense);
};

/// Finite set of states reached breadth-first from a root, with dense local
/// ids in discovery order and the kernel restricted to it.
class Truncation {
public:
    /// States within `max_depth` steps of root. Throws TruncationOverflow when
    /// more than `cap` states are reached.
    static Truncation breadth_first(const ExpectationKernel& kernel, StateIndex root, int max_depth,
                                    std::size_t cap = 1u << 22);

    std::size_t size() const { return states_.size(); }
    const std::vector<StateIndex>& states() const { return states_; }
    StateIndex state(std::size_t local) const { return states_[local]; }
    /// Local id or -1 when the state is outside.
    std::int64_t local(StateIndex s) const;
    const std::vector<int>& depths() const { return depths_; }
    /// Kernel restricted to the truncation (mass leaving it is dropped).
    const SparseMatrix& matrix() const { return matrix_; }
    /// Subset of local ids and the induced submatrix, ids relabelled in order.
    Truncation restricted(const std::vector<std::uint32_t>& keep) const;

private:
    std::vector<StateIndex> states_;
    std::unordered_map<StateIndex, std::uint32_t> index_;
    std::vector<int> depths_;
    SparseMatrix matrix_;
};

/// Local ids of the strongly connected component containing `node`.
std::vector<std::uint32_t> strongly_connected_component(const SparseMatrix& m, std::uint32_t node);

/// mantissa * 2^binary_scale.
struct ScaledMass {
    double mantissa = 0.0;
    int binary_scale = 0;
};

/// Total mass sum_y m^k(start, y) for k = 0..n as exact power-of-two scaled
/// values, so masses beyond the double range are still represented.
std::vector<ScaledMass> scaled_mass_sequence(const ExpectationKernel& kernel, StateIndex start, int n,
                                             std::size_t cap = 1u << 22);

/// Total mass sum_y m^k(start, y) for k = 0..n, returned as natural logs
/// (-inf once the mass is zero). Propagation is exact sparse vector-kernel
/// products with renormalization, so huge masses do not overflow. Throws
/// TruncationOverflow when more than `cap` distinct states are reached.
std::vector<double> log_mass_sequence(const ExpectationKernel& kernel, StateIndex start, int n,
                                      std::size_t cap = 1u << 22);

}  // namespace branchlab
