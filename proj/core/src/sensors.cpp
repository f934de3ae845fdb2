#include "polyrom/sensors.hpp"

#include <set>
#include <string>

#include "polyrom/errors.hpp"

namespace polyrom::pde {

SensorModel SensorModel::equally_spaced(int n, int count, double noise_std, std::uint64_t seed) {
    if (count < 1 || count > n) {
        throw InvalidInput("sensor count must lie in [1, " + std::to_string(n) + "], got " +
                           std::to_string(count));
    }
    SensorModel s;
    s.noise_std = noise_std;
    s.seed = seed;
    for (int j = 0; j < count; ++j) {
        s.indices.push_back(static_cast<int>((static_cast<long long>(j) * n) / count));
    }
    s.validate(n);
    return s;
}

void SensorModel::validate(Eigen::Index n) const {
    if (indices.empty()) throw InvalidInput("sensor model has no sensors");
    std::set<int> seen;
    for (int idx : indices) {
        if (idx < 0 || idx >= n) {
            throw InvalidInput("sensor index " + std::to_string(idx) + " outside [0, " +
                               std::to_string(n) + ")");
        }
        if (!seen.insert(idx).second) {
            throw InvalidInput("duplicate sensor index " + std::to_string(idx));
        }
    }
    if (!(noise_std >= 0.0)) throw InvalidInput("noise_std must be non-negative");
}

Vector measure(const Vector& z, const SensorModel& sensors, CounterRng& rng) {
    Vector y(static_cast<Eigen::Index>(sensors.indices.size()));
    for (std::size_t j = 0; j < sensors.indices.size(); ++j) {
        const int idx = sensors.indices[j];
        if (idx < 0 || idx >= z.size()) {
            throw InvalidInput("sensor index " + std::to_string(idx) + " outside state of size " +
                               std::to_string(z.size()));
        }
        const double noise = sensors.noise_std * rng.normal();
        y(static_cast<Eigen::Index>(j)) = z(idx) + noise;
    }
    return y;
}

Matrix measure_all(const Matrix& states, const SensorModel& sensors, CounterRng& rng) {
    Matrix out(static_cast<Eigen::Index>(sensors.indices.size()), states.cols());
    for (Eigen::Index k = 0; k < states.cols(); ++k) {
        out.col(k) = measure(states.col(k), sensors, rng);
    }
    return out;
}

}  // namespace polyrom::pde
