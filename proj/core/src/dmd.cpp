#include "polyrom/dmd.hpp"

#include <string>

#include "polyrom/errors.hpp"

namespace polyrom::rom {

SnapshotPairs build_snapshot_matrices(const std::vector<Trajectory>& trajectories) {
    if (trajectories.empty()) throw InvalidInput("no trajectories supplied");
    const Eigen::Index n = trajectories.front().state_dim();
    const Eigen::Index m = trajectories.front().pair_count();
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        const Trajectory& t = trajectories[i];
        if (t.snapshot_count() < 2) {
            throw InvalidInput("trajectory " + std::to_string(i) + " has fewer than 2 snapshots");
        }
        if (t.state_dim() != n || t.pair_count() != m) {
            throw InvalidInput("trajectory " + std::to_string(i) + " is " +
                               std::to_string(t.state_dim()) + "x" +
                               std::to_string(t.snapshot_count()) + ", expected " +
                               std::to_string(n) + "x" + std::to_string(m + 1));
        }
    }

    SnapshotPairs pairs;
    const Eigen::Index q = static_cast<Eigen::Index>(trajectories.size());
    pairs.X.resize(n, q * m);
    pairs.Y.resize(n, q * m);
    for (Eigen::Index i = 0; i < q; ++i) {
        const Matrix& s = trajectories[static_cast<std::size_t>(i)].snapshots;
        pairs.X.middleCols(i * m, m) = s.leftCols(m);
        pairs.Y.middleCols(i * m, m) = s.rightCols(m);
    }
    return pairs;
}

Matrix dmd_robust(const Matrix& X, const Matrix& Y, const PodBasis& basis) {
    if (X.rows() != Y.rows() || X.cols() != Y.cols()) {
        throw InvalidInput("X and Y must have identical shapes");
    }
    if (Y.rows() != basis.U.rows() || Y.cols() != basis.V.rows()) {
        throw InvalidInput("snapshot matrices are not conformable with the POD basis");
    }
    const Matrix UtYV = basis.U.transpose() * Y * basis.V;
    return UtYV * basis.sigma.cwiseInverse().asDiagonal();
}

LocalFit dmd_local(const Trajectory& trajectory, const PodBasis& basis) {
    if (trajectory.state_dim() != basis.U.rows()) {
        throw InvalidInput("trajectory state size " + std::to_string(trajectory.state_dim()) +
                           " does not match POD modes of size " +
                           std::to_string(basis.U.rows()));
    }
    if (trajectory.snapshot_count() < 2) {
        throw InvalidInput("trajectory needs at least 2 snapshots");
    }
    const Eigen::Index m = trajectory.pair_count();
    const Matrix reduced = basis.U.transpose() * trajectory.snapshots;
    const Matrix Xr = reduced.leftCols(m);
    const Matrix Yr = reduced.rightCols(m);

    const Pseudoinverse pinv = pseudoinverse(Xr);
    LocalFit fit;
    fit.A = Yr * pinv.matrix;
    fit.data_rank = pinv.rank;
    fit.rank_deficient = pinv.rank < basis.rank();
    return fit;
}

double one_step_residual(const Matrix& A, const Trajectory& trajectory, const PodBasis& basis) {
    const Eigen::Index m = trajectory.pair_count();
    const Matrix reduced = basis.U.transpose() * trajectory.snapshots;
    return (reduced.rightCols(m) - A * reduced.leftCols(m)).norm();
}

}  // namespace polyrom::rom
