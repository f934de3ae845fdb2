#pragma once

#include "polyrom/linalg.hpp"

namespace polyrom {

/// Time-ordered full-order snapshots for one parameter value.
/// Column k of `snapshots` is the state at t0 + k * dt.
struct Trajectory {
    double p = 0.0;
    Matrix snapshots;
    double dt = 0.0;
    double t0 = 0.0;
    /// Solver sub-steps per snapshot interval (largest used while recording); 0 if unknown.
    int substeps = 0;

    Eigen::Index state_dim() const noexcept { return snapshots.rows(); }
    Eigen::Index snapshot_count() const noexcept { return snapshots.cols(); }
    /// Number of (z_k, z_{k+1}) pairs, i.e. m.
    Eigen::Index pair_count() const noexcept { return snapshots.cols() - 1; }

    /// Throws InvalidInput when fewer than two snapshots or non-finite values are held.
    void validate() const;
};

}  // namespace polyrom
