#include "polyrom/linalg.hpp"

#include <algorithm>
#include <limits>

namespace polyrom {

double pinv_tolerance(Eigen::Index rows, Eigen::Index cols, double sigma_max) {
    return static_cast<double>(std::max(rows, cols)) * sigma_max *
           std::numeric_limits<double>::epsilon();
}

Eigen::Index numerical_rank(const Matrix& a) {
    if (a.size() == 0) return 0;
    Eigen::BDCSVD<Matrix> svd(a);
    const Vector& s = svd.singularValues();
    const double tol = pinv_tolerance(a.rows(), a.cols(), s(0));
    return (s.array() > tol).count();
}

Pseudoinverse pseudoinverse(const Matrix& a) {
    Pseudoinverse out;
    out.matrix = Matrix::Zero(a.cols(), a.rows());
    if (a.size() == 0) return out;

    Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    const double tol = pinv_tolerance(a.rows(), a.cols(), s(0));
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) <= tol) break;
        out.matrix.noalias() += svd.matrixV().col(i) * (svd.matrixU().col(i).transpose() / s(i));
        ++out.rank;
    }
    return out;
}

Matrix symmetrized(const Matrix& a) {
    return 0.5 * (a + a.transpose());
}

bool floor_eigenvalues(Matrix& cov, double floor) {
    cov = symmetrized(cov);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    Vector values = eig.eigenvalues();
    if (values.minCoeff() >= floor) return false;
    values = values.cwiseMax(floor);
    cov = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
    cov = symmetrized(cov);
    return true;
}

bool all_finite(const Matrix& a) {
    return a.allFinite();
}

}  // namespace polyrom
