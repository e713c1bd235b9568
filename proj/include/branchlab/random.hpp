#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace branchlab {

/// Counter-based random source (Philox4x32-10).
///
/// The key is derived from `seed`, and the 128-bit counter is split into a
/// 64-bit block index and the 64-bit `stream`. Two sources with the same
/// (seed, stream) produce identical draws; distinct streams never overlap.
/// Value semantic: copy it per replica, never share one mutably.
///
/// Satisfies UniformRandomBitGenerator, so std distributions accept it.
class RandomSource {
public:
    using result_type = std::uint64_t;

    explicit RandomSource(std::uint64_t seed = 0, std::uint64_t stream = 0) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

    /// Independent source for replica `index` under this source's seed.
    RandomSource replica(std::uint64_t index) const noexcept;

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform() noexcept;
    /// Uniform on (0, 1].
    double uniform_open_left() noexcept { return 1.0 - uniform(); }
    /// Standard normal (Box-Muller, pairs cached).
    double normal() noexcept;
    /// Exponential with the given rate; +inf when rate is 0.
    double exponential(double rate) noexcept;
    /// Binomial(n, p) by inversion for small means, std::binomial_distribution otherwise.
    std::uint64_t binomial(std::uint64_t n, double p);
    /// Binomial(n, p) for real-valued n (n may exceed 2^64), conditioned on the result
    /// being at least `at_least` (0 or 1). Requires a small mean n*p.
    double binomial_small_mean(double n, double p, int at_least);

private:
    void refill() noexcept;

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int buffered_ = 0;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

/// SplitMix64 finalizer; used for stream derivation and config hashing.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace branchlab
