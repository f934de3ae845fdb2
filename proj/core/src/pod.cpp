#include "polyrom/pod.hpp"

#include <string>

#include "polyrom/errors.hpp"

namespace polyrom::rom {

double PodBasis::retained_energy() const {
    const double total = spectrum.squaredNorm();
    return total > 0.0 ? sigma.squaredNorm() / total : 0.0;
}

PodBasis pod_basis(const Matrix& X, Eigen::Index r) {
    if (X.size() == 0) throw InvalidInput("snapshot matrix is empty");
    if (!X.allFinite()) throw InvalidInput("snapshot matrix holds non-finite values");
    if (r < 1) throw InvalidInput("POD rank must be at least 1, got " + std::to_string(r));

    Eigen::BDCSVD<Matrix> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    const double tol = pinv_tolerance(X.rows(), X.cols(), s(0));
    const Eigen::Index numerical = (s.array() > tol).count();
    if (r > numerical) {
        throw InvalidInput("requested POD rank " + std::to_string(r) +
                           " exceeds the numerical rank " + std::to_string(numerical) +
                           " of the snapshot matrix");
    }

    PodBasis basis;
    basis.U = svd.matrixU().leftCols(r);
    basis.sigma = s.head(r);
    basis.V = svd.matrixV().leftCols(r);
    basis.spectrum = s;
    return basis;
}

Vector project(const Vector& z, const PodBasis& basis) {
    if (z.size() != basis.U.rows()) {
        throw InvalidInput("cannot project a state of size " + std::to_string(z.size()) +
                           " onto modes of size " + std::to_string(basis.U.rows()));
    }
    return basis.U.transpose() * z;
}

Vector lift(const Vector& x, const PodBasis& basis) {
    if (x.size() != basis.U.cols()) {
        throw InvalidInput("cannot lift a reduced state of size " + std::to_string(x.size()) +
                           " with " + std::to_string(basis.U.cols()) + " modes");
    }
    return basis.U * x;
}

}  // namespace polyrom::rom
