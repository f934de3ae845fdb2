#pragma once

#include <cstdint>
#include <vector>

#include "polyrom/linalg.hpp"
#include "polyrom/rng.hpp"

namespace polyrom::pde {

/// Point sensors on grid nodes with additive white Gaussian noise.
struct SensorModel {
    std::vector<int> indices;
    double noise_std = 0.05;
    std::uint64_t seed = 0;

    /// Indices floor(j * n / count), j = 0 .. count-1.
    static SensorModel equally_spaced(int n, int count, double noise_std, std::uint64_t seed = 0);

    /// Throws InvalidInput unless indices are distinct, inside [0, n) and noise_std >= 0.
    void validate(Eigen::Index n) const;
    std::size_t size() const noexcept { return indices.size(); }
};

/// y[j] = z[indices[j]] + noise_std * N(0, 1); advances `rng`.
Vector measure(const Vector& z, const SensorModel& sensors, CounterRng& rng);

/// Measures every column of `states`; column k of the result belongs to column k of the input.
Matrix measure_all(const Matrix& states, const SensorModel& sensors, CounterRng& rng);

}  // namespace polyrom::pde
