#pragma once

#include <vector>

#include "polyrom/linalg.hpp"
#include "polyrom/pod.hpp"
#include "polyrom/trajectory.hpp"

namespace polyrom::rom {

/// Time-shifted pair: column j of Y is the successor of column j of X.
struct SnapshotPairs {
    Matrix X;
    Matrix Y;
};

/// Concatenates z_0..z_{m-1} (X) and z_1..z_m (Y) of each trajectory in
/// order. No pair crosses a trajectory boundary.
SnapshotPairs build_snapshot_matrices(const std::vector<Trajectory>& trajectories);

/// Robust operator from the economical form U^T Y V Sigma^{-1}.
Matrix dmd_robust(const Matrix& X, const Matrix& Y, const PodBasis& basis);

struct LocalFit {
    Matrix A;
    /// Numerical rank of the reduced data U^T X^(i); below r means a minimum-norm fit.
    Eigen::Index data_rank = 0;
    bool rank_deficient = false;
};

/// Local operator U^T Y (X)^+ U of one trajectory, fitted as the reduced
/// regression min_A || U^T Y - A U^T X ||_F.
LocalFit dmd_local(const Trajectory& trajectory, const PodBasis& basis);

/// || U^T Y - A U^T X ||_F over one trajectory's pairs.
double one_step_residual(const Matrix& A, const Trajectory& trajectory, const PodBasis& basis);

}  // namespace polyrom::rom
