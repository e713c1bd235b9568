#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace branchlab {

/// Index of a state in a countable state space (graph vertex, lattice site, grid cell).
struct StateIndex {
    std::uint64_t id = 0;

    constexpr StateIndex() = default;
    constexpr explicit StateIndex(std::uint64_t v) : id(v) {}

    friend constexpr auto operator<=>(StateIndex, StateIndex) = default;
};

/// One nonzero entry m(x, y) of a sparse nonnegative kernel row.
struct KernelEntry {
    StateIndex to;
    double weight = 0.0;
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: bad config, invalid law, precondition violated by the caller.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// An iterative method hit its cap without meeting its tolerance.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// A time-stepper produced out-of-range values beyond the allowed clamp.
class InstabilityError : public ConvergenceError {
public:
    using ConvergenceError::ConvergenceError;
};

/// The reachable set of a lazily materialized kernel grew beyond the caller's cap.
class TruncationOverflow : public Error {
public:
    using Error::Error;
};

}  // namespace branchlab

template <>
struct std::hash<branchlab::StateIndex> {
    std::size_t operator()(branchlab::StateIndex s) const noexcept {
        return std::hash<std::uint64_t>{}(s.id);
    }
};
