#pragma once

#include "polyrom/linalg.hpp"

namespace polyrom::rom {

/// Leading-r SVD factors of a snapshot matrix, X ~ U diag(sigma) V^T.
struct PodBasis {
    Matrix U;
    Vector sigma;
    Matrix V;
    /// Every singular value of X (not only the retained ones), for energy audits.
    Vector spectrum;

    Eigen::Index rank() const noexcept { return sigma.size(); }
    Eigen::Index state_dim() const noexcept { return U.rows(); }

    /// Sum of retained sigma^2 over the sum of all sigma^2.
    double retained_energy() const;
};

/// Truncated SVD of X. Throws InvalidInput when r < 1 or r exceeds the
/// numerical rank of X; the message names the numerical rank.
PodBasis pod_basis(const Matrix& X, Eigen::Index r);

/// x = U^T z
Vector project(const Vector& z, const PodBasis& basis);
/// z = U x
Vector lift(const Vector& x, const PodBasis& basis);

}  // namespace polyrom::rom
