#include "polyrom/rng.hpp"

#include <cmath>
#include <numbers>

namespace polyrom {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t CounterRng::next_u64() {
    ++counter_;
    return splitmix64_mix(seed_ + counter_ * kGolden);
}

double CounterRng::uniform() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double CounterRng::normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> labels) {
    std::uint64_t h = splitmix64_mix(root ^ 0x5EEDULL);
    for (std::uint64_t label : labels) {
        h = splitmix64_mix(h + kGolden + splitmix64_mix(label));
    }
    return h;
}

}  // namespace polyrom
