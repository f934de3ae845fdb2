#pragma once

#include <functional>
#include <vector>

#include "polyrom/linalg.hpp"
#include "polyrom/pod.hpp"
#include "polyrom/sensors.hpp"

namespace polyrom::estimation {

/// Mean and covariance of a filter estimate.
struct GaussianBelief {
    Vector mean;
    Matrix cov;

    Eigen::Index dim() const noexcept { return mean.size(); }
    /// Throws InvalidInput on shape mismatch; NumericalError on asymmetry
    /// beyond 1e-10 or an eigenvalue below -1e-10.
    void validate() const;
};

struct NoiseConfig {
    double q_state = 1e-4;
    double q_param = 1e-5;
    double r_meas = 0.0025;

    void validate() const;
};

/// Sigma-point scaling; lambda = alpha^2 (L + kappa) - L.
struct UkfParams {
    double alpha = 1.0;
    double beta = 2.0;
    double kappa = 0.0;

    void validate(Eigen::Index dim) const;
};

/// Linear reduced observation map H = S U: rows of U at the sensor nodes.
struct ObservationOperator {
    Matrix H;

    static ObservationOperator from_sensors(const rom::PodBasis& basis,
                                            const pde::SensorModel& sensors);
    Eigen::Index measurement_dim() const noexcept { return H.rows(); }
};

struct FilterDiagnostics {
    /// Covariances that had to be floored before a Cholesky factor existed.
    int regularizations = 0;
};

/// Re-symmetrizes cov and lifts eigenvalues below zero to zero.
void condition_covariance(GaussianBelief& belief);

/// Predict with x <- A x, P <- A P A^T + q_state I, then update with
/// K = P H^T (H P H^T + r_meas I)^{-1} and the Joseph-form covariance.
/// Throws NumericalError when the innovation covariance is numerically singular.
GaussianBelief kf_step(const GaussianBelief& belief, const Matrix& A, const Matrix& H,
                       const Vector& y, const NoiseConfig& noise);

using VectorMap = std::function<Vector(const Vector&)>;

/// Unscented predict/update with additive process noise Q and measurement noise R.
/// Sigma points are redrawn from the predicted belief before the observation transform.
GaussianBelief ukf_step(const GaussianBelief& belief, const VectorMap& f, const VectorMap& h,
                        const Vector& y, const Matrix& Q, const Matrix& R,
                        const UkfParams& params, FilterDiagnostics* diagnostics = nullptr);

/// Same with Q = q_state I and R = r_meas I.
GaussianBelief ukf_step(const GaussianBelief& belief, const VectorMap& f, const VectorMap& h,
                        const Vector& y, const NoiseConfig& noise, const UkfParams& params,
                        FilterDiagnostics* diagnostics = nullptr);

/// 2L+1 symmetric sigma points (columns) with their mean and covariance weights.
struct SigmaPoints {
    Matrix points;
    Vector mean_weights;
    Vector cov_weights;
};

SigmaPoints sigma_points(const GaussianBelief& belief, const UkfParams& params,
                         FilterDiagnostics* diagnostics = nullptr);

}  // namespace polyrom::estimation
