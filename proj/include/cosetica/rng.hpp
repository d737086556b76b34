#ifndef COSETICA_RNG_HPP
#define COSETICA_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

// Counter-based random streams.  Each (seed, stream) pair is an independent
// deterministic sequence; draws depend only on the counter value, so results
// are stable across platforms and standard libraries (std:: distributions are
// implementation-defined, which would break the byte-identical-output
// contract of the CLI).

namespace cosetica {

class RngStream {
  public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix(seed ^ mix(0x517cc1b727220a95ULL * (stream + 1)))) {}

    std::uint64_t next_u64() { return mix(key_ + GOLDEN * ++counter_); }

    // uniform on (0,1): 53-bit mantissa, zero remapped to the smallest step
    double uniform01() {
        const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        return u > 0.0 ? u : 0x1.0p-53;
    }

    // zero mean, unit variance on [-sqrt(3), sqrt(3)]
    double uniform_sym() { return std::sqrt(3.0) * (2.0 * uniform01() - 1.0); }

    // Box-Muller, two draws per variate (no cached spare -> stateless apart from the counter)
    double normal() {
        const double u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    // unit-variance Laplace (b = 1/sqrt(2)) by inverse CDF
    double laplace() {
        const double u = uniform01() - 0.5;
        const double b = 1.0 / std::sqrt(2.0);
        return (u < 0.0 ? b : -b) * std::log(1.0 - 2.0 * std::abs(u));
    }

    double rademacher() { return (next_u64() & 1u) ? 1.0 : -1.0; }

    // two-point: a = sqrt((1-p)/p) w.p. p, b = -sqrt(p/(1-p)) w.p. 1-p
    // (exact zero mean, unit variance; p = 1/2 reduces to rademacher)
    double two_point(double p) {
        const double a = std::sqrt((1.0 - p) / p);
        const double b = -std::sqrt(p / (1.0 - p));
        return uniform01() < p ? a : b;
    }

  private:
    static constexpr std::uint64_t GOLDEN = 0x9e3779b97f4a7c15ULL;

    // splitmix64 finalizer
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace cosetica

#endif
