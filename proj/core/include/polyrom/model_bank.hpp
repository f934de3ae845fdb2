#pragma once

#include <vector>

#include "polyrom/dmd.hpp"
#include "polyrom/linalg.hpp"
#include "polyrom/pod.hpp"
#include "polyrom/trajectory.hpp"

namespace polyrom::rom {

/// Local reduced operators on a training grid plus the robust operator.
///
/// The polytopic operator is the softmax-weighted average
///   A(p) = sum_i w_i(p) A_local[i],   w_i = exp(l_i) / sum_j exp(l_j),
///   l_i(p) = 1 / (epsilon + |p - p_train[i]| / (p_max - p_min)),
/// evaluated at p clamped to [p_min, p_max].
struct ModelBank {
    std::vector<double> p_train;
    std::vector<Matrix> A_local;
    Matrix A_robust;
    double epsilon = 1e-2;
    double p_min = 0.0;
    double p_max = 1.0;

    Eigen::Index rank() const noexcept { return A_robust.rows(); }
    std::size_t size() const noexcept { return p_train.size(); }
    double mean_training_parameter() const;

    /// Throws InvalidInput when an invariant is violated.
    void validate() const;
};

struct BankOptions {
    double epsilon = 1e-2;
    double p_min = 0.0;
    double p_max = 1.0;
    int jobs = 1;
};

struct TrainedModel {
    PodBasis basis;
    ModelBank bank;
    std::vector<LocalFit> local_fits;
};

/// POD of the concatenated X, one local DMD per trajectory and the robust DMD,
/// all sharing the same basis. Trajectories must be ordered by parameter.
TrainedModel train_model(const std::vector<Trajectory>& trajectories, Eigen::Index r,
                         const BankOptions& options = {});

/// Softmax weights at clip(p, p_min, p_max). Non-negative, summing to one.
Vector weights(double p, const ModelBank& bank);

/// sum_i w_i(p) A_local[i]
Matrix polytopic_matrix(double p, const ModelBank& bank);

}  // namespace polyrom::rom
