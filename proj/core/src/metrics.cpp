#include "polyrom/metrics.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "polyrom/errors.hpp"

namespace polyrom::harness {

double relative_error(const Vector& z_hat, const Vector& z_true) {
    if (z_hat.size() != z_true.size()) {
        throw InvalidInput("relative_error: estimate has " + std::to_string(z_hat.size()) +
                           " entries, truth has " + std::to_string(z_true.size()));
    }
    const double scale = z_true.norm();
    if (!(scale > 0.0)) throw InvalidInput("relative_error: true state has zero norm");
    return (z_hat - z_true).norm() / scale;
}

double projection_floor(const Vector& z_true, const rom::PodBasis& basis) {
    return relative_error(rom::lift(rom::project(z_true, basis), basis), z_true);
}

namespace {

double mean_of(std::vector<double>::const_iterator first, std::vector<double>::const_iterator last) {
    const auto count = std::distance(first, last);
    if (count == 0) return std::nan("");
    return std::accumulate(first, last, 0.0) / static_cast<double>(count);
}

}  // namespace

double MetricSeries::time_average() const { return mean_of(values.begin(), values.end()); }

double MetricSeries::last_half_average() const {
    const auto half = static_cast<std::ptrdiff_t>(values.size() / 2);
    return mean_of(values.begin() + half, values.end());
}

SeedStatistics across_seeds(const std::vector<double>& values) {
    SeedStatistics stats;
    stats.count = values.size();
    if (values.empty()) {
        stats.mean = stats.std = std::nan("");
        return stats;
    }
    stats.mean = mean_of(values.begin(), values.end());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - stats.mean) * (v - stats.mean);
        stats.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return stats;
}

}  // namespace polyrom::harness
