#include "branchlab/random.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace branchlab {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    return ctr;
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

RandomSource::RandomSource(std::uint64_t seed, std::uint64_t stream) noexcept
    : seed_(seed), stream_(stream) {}

RandomSource RandomSource::replica(std::uint64_t index) const noexcept {
    return RandomSource(seed_, mix64(stream_ ^ mix64(index + 1)));
}

void RandomSource::refill() noexcept {
    const std::uint64_t key64 = mix64(seed_);
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    const auto out = philox4x32(ctr, {static_cast<std::uint32_t>(key64), static_cast<std::uint32_t>(key64 >> 32)});
    buffer_[0] = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
    buffer_[1] = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
    buffered_ = 2;
    ++block_;
}

RandomSource::result_type RandomSource::operator()() noexcept {
    if (buffered_ == 0) refill();
    return buffer_[2 - buffered_--];
}

double RandomSource::uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double RandomSource::normal() noexcept {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    const double u1 = uniform_open_left();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_normal_ = radius * std::sin(angle);
    has_cached_normal_ = true;
    return radius * std::cos(angle);
}

double RandomSource::exponential(double rate) noexcept {
    if (rate <= 0.0) return std::numeric_limits<double>::infinity();
    return -std::log(uniform_open_left()) / rate;
}

std::uint64_t RandomSource::binomial(std::uint64_t n, double p) {
    if (n == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    if (static_cast<double>(n) * p < 20.0) {
        return static_cast<std::uint64_t>(binomial_small_mean(static_cast<double>(n), p, 0));
    }
    std::binomial_distribution<std::uint64_t> dist(n, p);
    return dist(*this);
}

double RandomSource::binomial_small_mean(double n, double p, int at_least) {
    if (n <= 0.0 || p <= 0.0) {
        if (at_least > 0) throw std::domain_error("binomial conditioned on a success with zero mean");
        return 0.0;
    }
    if (p >= 1.0) return n;
    const double log_q = std::log1p(-p);
    const double pmf0 = std::exp(n * log_q);
    // Inversion over k = 0, 1, ...; pmf(k+1) = pmf(k) * (n-k)/(k+1) * p/(1-p).
    double u = uniform();
    double k = 0.0;
    double pmf = pmf0;
    if (at_least > 0) {
        // P(K >= 1) = 1 - (1-p)^n, computed without cancellation.
        const double tail = -std::expm1(n * log_q);
        u = u * tail;
        k = 1.0;
        pmf = n * p * std::exp((n - 1.0) * log_q);
    }
    const double ratio = p / (1.0 - p);
    while (u >= pmf && k < n) {
        u -= pmf;
        pmf *= (n - k) / (k + 1.0) * ratio;
        k += 1.0;
        if (pmf <= 0.0) break;
    }
    return k;
}

}  // namespace branchlab
