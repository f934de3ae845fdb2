#pragma once

#include <vector>

#include "polyrom/linalg.hpp"
#include "polyrom/pod.hpp"

namespace polyrom::harness {

/// ||z_hat - z_true|| / ||z_true||. Throws InvalidInput on a dimension
/// mismatch or a zero-norm truth.
double relative_error(const Vector& z_hat, const Vector& z_true);

/// Relative error of the orthogonal projection of z_true onto the POD modes,
/// the smallest error any lifted reduced estimate can reach.
double projection_floor(const Vector& z_true, const rom::PodBasis& basis);

/// Per-step errors of one run with their time averages.
struct MetricSeries {
    std::vector<double> values;

    double time_average() const;
    /// Average over steps [K/2, K).
    double last_half_average() const;
};

/// Mean and sample standard deviation (zero for fewer than two values).
struct SeedStatistics {
    double mean = 0.0;
    double std = 0.0;
    std::size_t count = 0;
};

SeedStatistics across_seeds(const std::vector<double>& values);

}  // namespace polyrom::harness
