#include "polyrom/kalman.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "polyrom/errors.hpp"

namespace polyrom::estimation {

namespace {

Eigen::LDLT<Matrix> factor_innovation(const Matrix& S) {
    Eigen::LDLT<Matrix> ldlt(S);
    const double rcond = ldlt.info() == Eigen::Success ? ldlt.rcond() : 0.0;
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || !(rcond > 1e-14)) {
        std::ostringstream msg;
        msg << "innovation covariance is numerically singular (reciprocal condition number "
            << rcond << ")";
        throw NumericalError(msg.str());
    }
    return ldlt;
}

void check_square(const Matrix& m, Eigen::Index n, const char* what) {
    if (m.rows() != n || m.cols() != n) {
        throw InvalidInput(std::string(what) + " must be " + std::to_string(n) + "x" +
                           std::to_string(n) + ", got " + std::to_string(m.rows()) + "x" +
                           std::to_string(m.cols()));
    }
}

}  // namespace

void GaussianBelief::validate() const {
    if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
        throw InvalidInput("covariance shape does not match mean of size " +
                           std::to_string(mean.size()));
    }
    if (!mean.allFinite() || !cov.allFinite()) throw NumericalError("belief holds non-finite values");
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
        throw NumericalError("covariance is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10) {
        throw NumericalError("covariance has a negative eigenvalue " +
                             std::to_string(eig.eigenvalues().minCoeff()));
    }
}

void NoiseConfig::validate() const {
    if (!(q_state >= 0.0) || !(q_param >= 0.0)) {
        throw InvalidInput("process-noise variances must be non-negative");
    }
    if (!(r_meas > 0.0)) throw InvalidInput("measurement-noise variance must be positive");
}

void UkfParams::validate(Eigen::Index dim) const {
    if (!(alpha > 0.0)) throw InvalidInput("UKF alpha must be positive");
    const double L = static_cast<double>(dim);
    const double lambda = alpha * alpha * (L + kappa) - L;
    if (!(L + lambda > 0.0)) throw InvalidInput("UKF scaling yields non-positive L + lambda");
}

ObservationOperator ObservationOperator::from_sensors(const rom::PodBasis& basis,
                                                      const pde::SensorModel& sensors) {
    sensors.validate(basis.U.rows());
    ObservationOperator op;
    op.H.resize(static_cast<Eigen::Index>(sensors.indices.size()), basis.U.cols());
    for (std::size_t j = 0; j < sensors.indices.size(); ++j) {
        op.H.row(static_cast<Eigen::Index>(j)) = basis.U.row(sensors.indices[j]);
    }
    return op;
}

void condition_covariance(GaussianBelief& belief) {
    floor_eigenvalues(belief.cov, 0.0);
}

GaussianBelief kf_step(const GaussianBelief& belief, const Matrix& A, const Matrix& H,
                       const Vector& y, const NoiseConfig& noise) {
    const Eigen::Index n = belief.dim();
    check_square(belief.cov, n, "covariance");
    check_square(A, n, "transition matrix");
    if (H.cols() != n || H.rows() != y.size()) {
        throw InvalidInput("observation matrix is " + std::to_string(H.rows()) + "x" +
                           std::to_string(H.cols()) + " for a state of size " +
                           std::to_string(n) + " and " + std::to_string(y.size()) +
                           " measurements");
    }

    const Vector x_pred = A * belief.mean;
    Matrix P_pred = A * belief.cov * A.transpose();
    P_pred.diagonal().array() += noise.q_state;

    Matrix S = H * P_pred * H.transpose();
    S.diagonal().array() += noise.r_meas;
    const auto ldlt = factor_innovation(symmetrized(S));
    const Matrix K = ldlt.solve(H * P_pred).transpose();

    GaussianBelief out;
    out.mean = x_pred + K * (y - H * x_pred);
    const Matrix I_KH = Matrix::Identity(n, n) - K * H;
    out.cov = I_KH * P_pred * I_KH.transpose() + noise.r_meas * K * K.transpose();
    condition_covariance(out);
    return out;
}

SigmaPoints sigma_points(const GaussianBelief& belief, const UkfParams& params,
                         FilterDiagnostics* diagnostics) {
    const Eigen::Index n = belief.dim();
    params.validate(n);
    const double L = static_cast<double>(n);
    const double lambda = params.alpha * params.alpha * (L + params.kappa) - L;
    const double spread = std::sqrt(L + lambda);

    Matrix cov = symmetrized(belief.cov);
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) {
        const double floor = 1e-12 * std::max(1.0, cov.trace() / L);
        floor_eigenvalues(cov, floor);
        if (diagnostics) ++diagnostics->regularizations;
        llt.compute(cov);
        if (llt.info() != Eigen::Success) {
            throw NumericalError("Cholesky factorization failed after covariance flooring");
        }
    }
    const Matrix root = llt.matrixL();

    SigmaPoints sp;
    sp.points.resize(n, 2 * n + 1);
    sp.points.col(0) = belief.mean;
    for (Eigen::Index i = 0; i < n; ++i) {
        sp.points.col(1 + i) = belief.mean + spread * root.col(i);
        sp.points.col(1 + n + i) = belief.mean - spread * root.col(i);
    }
    sp.mean_weights = Vector::Constant(2 * n + 1, 0.5 / (L + lambda));
    sp.mean_weights(0) = lambda / (L + lambda);
    sp.cov_weights = sp.mean_weights;
    sp.cov_weights(0) += 1.0 - params.alpha * params.alpha + params.beta;
    return sp;
}

GaussianBelief ukf_step(const GaussianBelief& belief, const VectorMap& f, const VectorMap& h,
                        const Vector& y, const Matrix& Q, const Matrix& R,
                        const UkfParams& params, FilterDiagnostics* diagnostics) {
    const Eigen::Index n = belief.dim();
    check_square(belief.cov, n, "covariance");
    check_square(Q, n, "process-noise covariance");
    check_square(R, y.size(), "measurement-noise covariance");

    // Predict.
    const SigmaPoints prior = sigma_points(belief, params, diagnostics);
    const Eigen::Index count = prior.points.cols();
    Matrix propagated(n, count);
    for (Eigen::Index i = 0; i < count; ++i) {
        Vector fx = f(prior.points.col(i));
        if (fx.size() != n) throw InvalidInput("propagation map changed the state dimension");
        propagated.col(i) = std::move(fx);
    }
    GaussianBelief predicted;
    predicted.mean = propagated * prior.mean_weights;
    const Matrix dx = propagated.colwise() - predicted.mean;
    predicted.cov = symmetrized(dx * prior.cov_weights.asDiagonal() * dx.transpose() + Q);

    // Update.
    const SigmaPoints sp = sigma_points(predicted, params, diagnostics);
    Matrix observed(y.size(), count);
    for (Eigen::Index i = 0; i < count; ++i) {
        Vector hx = h(sp.points.col(i));
        if (hx.size() != y.size()) {
            throw InvalidInput("observation map returned " + std::to_string(hx.size()) +
                               " values for " + std::to_string(y.size()) + " measurements");
        }
        observed.col(i) = std::move(hx);
    }
    const Vector y_pred = observed * sp.mean_weights;
    const Matrix dy = observed.colwise() - y_pred;
    const Matrix dxs = sp.points.colwise() - predicted.mean;
    const Matrix Pyy = symmetrized(dy * sp.cov_weights.asDiagonal() * dy.transpose() + R);
    const Matrix Pxy = dxs * sp.cov_weights.asDiagonal() * dy.transpose();

    const auto ldlt = factor_innovation(Pyy);
    const Matrix K = ldlt.solve(Pxy.transpose()).transpose();

    GaussianBelief out;
    out.mean = predicted.mean + K * (y - y_pred);
    out.cov = predicted.cov - K * Pyy * K.transpose();
    condition_covariance(out);
    return out;
}

GaussianBelief ukf_step(const GaussianBelief& belief, const VectorMap& f, const VectorMap& h,
                        const Vector& y, const NoiseConfig& noise, const UkfParams& params,
                        FilterDiagnostics* diagnostics) {
    const Eigen::Index n = belief.dim();
    const Matrix Q = noise.q_state * Matrix::Identity(n, n);
    const Matrix R = noise.r_meas * Matrix::Identity(y.size(), y.size());
    return ukf_step(belief, f, h, y, Q, R, params, diagnostics);
}

}  // namespace polyrom::estimation
