#include "polyrom/model_bank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "polyrom/errors.hpp"
#include "polyrom/parallel.hpp"

namespace polyrom::rom {

double ModelBank::mean_training_parameter() const {
    if (p_train.empty()) return 0.5 * (p_min + p_max);
    return std::accumulate(p_train.begin(), p_train.end(), 0.0) /
           static_cast<double>(p_train.size());
}

void ModelBank::validate() const {
    if (p_train.empty()) throw InvalidInput("model bank has no training parameters");
    if (A_local.size() != p_train.size()) {
        throw InvalidInput("model bank holds " + std::to_string(A_local.size()) +
                           " local operators for " + std::to_string(p_train.size()) +
                           " training parameters");
    }
    const Eigen::Index r = A_robust.rows();
    if (r < 1 || A_robust.cols() != r) throw InvalidInput("robust operator must be square");
    for (std::size_t i = 0; i < A_local.size(); ++i) {
        if (A_local[i].rows() != r || A_local[i].cols() != r) {
            throw InvalidInput("local operator " + std::to_string(i) + " is not " +
                               std::to_string(r) + "x" + std::to_string(r));
        }
    }
    for (std::size_t i = 1; i < p_train.size(); ++i) {
        if (!(p_train[i] > p_train[i - 1])) {
            throw InvalidInput("training parameters must be strictly increasing");
        }
    }
    if (!(epsilon > 0.0)) throw InvalidInput("epsilon must be positive");
    if (!(p_min <= p_train.front()) || !(p_train.back() <= p_max)) {
        throw InvalidInput("training parameters must lie inside [p_min, p_max]");
    }
}

TrainedModel train_model(const std::vector<Trajectory>& trajectories, Eigen::Index r,
                         const BankOptions& options) {
    const SnapshotPairs pairs = build_snapshot_matrices(trajectories);

    TrainedModel model;
    model.basis = pod_basis(pairs.X, r);

    ModelBank& bank = model.bank;
    bank.epsilon = options.epsilon;
    bank.p_min = options.p_min;
    bank.p_max = options.p_max;
    bank.A_robust = dmd_robust(pairs.X, pairs.Y, model.basis);

    const std::size_t q = trajectories.size();
    bank.p_train.resize(q);
    bank.A_local.resize(q);
    model.local_fits.resize(q);
    parallel_for(q, options.jobs, [&](std::size_t i) {
        model.local_fits[i] = dmd_local(trajectories[i], model.basis);
    });
    for (std::size_t i = 0; i < q; ++i) {
        bank.p_train[i] = trajectories[i].p;
        bank.A_local[i] = model.local_fits[i].A;
    }
    bank.validate();
    return model;
}

Vector weights(double p, const ModelBank& bank) {
    const Eigen::Index q = static_cast<Eigen::Index>(bank.p_train.size());
    const double clamped = std::clamp(p, bank.p_min, bank.p_max);
    const double range = bank.p_max - bank.p_min;
    Vector logits(q);
    for (Eigen::Index i = 0; i < q; ++i) {
        const double distance = std::abs(clamped - bank.p_train[static_cast<std::size_t>(i)]);
        const double scaled = range > 0.0 ? distance / range : 0.0;
        logits(i) = 1.0 / (bank.epsilon + scaled);
    }
    const Vector shifted = (logits.array() - logits.maxCoeff()).exp();
    return shifted / shifted.sum();
}

Matrix polytopic_matrix(double p, const ModelBank& bank) {
    const Vector w = weights(p, bank);
    Matrix A = Matrix::Zero(bank.rank(), bank.rank());
    for (std::size_t i = 0; i < bank.A_local.size(); ++i) {
        A += w(static_cast<Eigen::Index>(i)) * bank.A_local[i];
    }
    return A;
}

}  // namespace polyrom::rom
