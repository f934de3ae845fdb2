#pragma once

#include <Eigen/Dense>

namespace polyrom {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Cutoff below which singular values count as zero: max(rows, cols) * sigma_max * eps.
double pinv_tolerance(Eigen::Index rows, Eigen::Index cols, double sigma_max);

/// Number of singular values above pinv_tolerance.
Eigen::Index numerical_rank(const Matrix& a);

struct Pseudoinverse {
    Matrix matrix;
    Eigen::Index rank = 0;
};

/// Minimum-norm pseudoinverse via SVD, using pinv_tolerance as the cutoff.
Pseudoinverse pseudoinverse(const Matrix& a);

/// (A + A^T) / 2
Matrix symmetrized(const Matrix& a);

/// Symmetrizes and lifts eigenvalues below `floor` up to `floor`.
/// Returns true when any eigenvalue had to be raised.
bool floor_eigenvalues(Matrix& cov, double floor);

bool all_finite(const Matrix& a);

}  // namespace polyrom
