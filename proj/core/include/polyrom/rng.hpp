#pragma once

#include <cstdint>
#include <initializer_list>

namespace polyrom {

/// Counter-based generator: draw i is splitmix64_mix(seed + (i + 1) * 0x9E3779B97F4A7C15).
///
/// The stream is fully defined by (seed, counter), so any implementation that
/// follows the formulas below reproduces measurement noise bit for bit:
///   uniform  = ((draw >> 11) + 1) * 2^-53             in (0, 1]
///   normal   = sqrt(-2 ln u1) * cos(2 pi u2)          two draws per variate
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed = 0, std::uint64_t counter = 0)
        : seed_(seed), counter_(counter) {}

    std::uint64_t next_u64();
    double uniform();
    double normal();

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_;
};

std::uint64_t splitmix64_mix(std::uint64_t z);

/// Deterministic child seed for a labelled sub-stream of `root`.
std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> labels);

}  // namespace polyrom
