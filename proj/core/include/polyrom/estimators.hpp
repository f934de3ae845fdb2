#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "polyrom/kalman.hpp"
#include "polyrom/model_bank.hpp"
#include "polyrom/pod.hpp"

namespace polyrom::estimation {

enum class EstimatorKind { RobustKf, JointUkf, ModularUkf };

/// "rROM-KF", "apROM-jKF", "apROM-mKF"
std::string_view estimator_name(EstimatorKind kind);
/// Inverse of estimator_name; throws InvalidInput on an unknown name.
EstimatorKind parse_estimator(std::string_view name);
const std::vector<EstimatorKind>& all_estimators();

struct EstimatorConfig {
    NoiseConfig noise;
    UkfParams ukf;
    /// Initial reduced-state covariance is initial_state_var * I.
    double initial_state_var = 1.0;
    /// Defaults to ((p_max - p_min) / 2)^2.
    std::optional<double> initial_param_var;
    /// Defaults to the mean of the training grid.
    std::optional<double> initial_param;
    /// Parameter variance below which it is re-inflated to q_param.
    double param_var_collapse = 1e-14;
    /// Keep the parameter mean inside [p_min, p_max] after each update.
    /// The weights are flat outside the range, so an unprojected mean that
    /// leaves it receives no gradient back.
    bool project_parameter = true;
    /// Multiplier on the apROM-mKF parameter-filter innovation noise. The
    /// one-step residuals seen by that filter are strongly correlated in time,
    /// so treating each as independent overstates the information per step.
    double param_innovation_inflation = 64.0;
};

/// One emitted estimate. Parameter fields are NaN for the robust filter.
struct EstimateStep {
    Vector x_hat;
    Vector z_hat;
    /// Parameter estimate clamped to [p_min, p_max] for reporting.
    double p_hat = 0.0;
    /// Unclamped filter parameter mean.
    double p_hat_raw = 0.0;
    double p_hat_var = 0.0;
    /// Full covariance of the filter that produced x_hat (joint for apROM-jKF).
    Matrix cov;
};

/// Sequential estimator consuming one measurement per call.
class Estimator {
public:
    virtual ~Estimator() = default;
    virtual EstimatorKind kind() const = 0;
    virtual EstimateStep step(const Vector& y) = 0;
    const FilterDiagnostics& diagnostics() const noexcept { return diagnostics_; }
    /// Times the parameter variance collapsed and was re-inflated.
    int reinflations() const noexcept { return reinflations_; }

protected:
    FilterDiagnostics diagnostics_;
    int reinflations_ = 0;
};

/// Linear KF on the robust operator.
class RobustKf final : public Estimator {
public:
    RobustKf(const rom::ModelBank& bank, const rom::PodBasis& basis, ObservationOperator H,
             EstimatorConfig config);
    EstimatorKind kind() const override { return EstimatorKind::RobustKf; }
    EstimateStep step(const Vector& y) override;
    const GaussianBelief& belief() const noexcept { return state_; }

private:
    const rom::ModelBank& bank_;
    const rom::PodBasis& basis_;
    ObservationOperator H_;
    EstimatorConfig config_;
    GaussianBelief state_;
};

/// Single UKF over [x; p] with dynamics [A(clip p) x; p].
class JointUkf final : public Estimator {
public:
    JointUkf(const rom::ModelBank& bank, const rom::PodBasis& basis, ObservationOperator H,
             EstimatorConfig config);
    EstimatorKind kind() const override { return EstimatorKind::JointUkf; }
    EstimateStep step(const Vector& y) override;
    const GaussianBelief& belief() const noexcept { return joint_; }

private:
    const rom::ModelBank& bank_;
    const rom::PodBasis& basis_;
    ObservationOperator H_;
    EstimatorConfig config_;
    GaussianBelief joint_;
    Matrix Q_;
    Matrix R_;
};

/// Parameter UKF followed by a state KF each step. The parameter filter
/// observes y_k through p -> H A(clip p) x_{k-1}, using the previous state
/// estimate; the state filter then propagates with A(clip p_k).
class ModularUkf final : public Estimator {
public:
    ModularUkf(const rom::ModelBank& bank, const rom::PodBasis& basis, ObservationOperator H,
               EstimatorConfig config);
    EstimatorKind kind() const override { return EstimatorKind::ModularUkf; }
    EstimateStep step(const Vector& y) override;
    const GaussianBelief& state_belief() const noexcept { return state_; }
    const GaussianBelief& parameter_belief() const noexcept { return param_; }

private:
    const rom::ModelBank& bank_;
    const rom::PodBasis& basis_;
    ObservationOperator H_;
    EstimatorConfig config_;
    GaussianBelief state_;
    GaussianBelief param_;
};

std::unique_ptr<Estimator> make_estimator(EstimatorKind kind, const rom::ModelBank& bank,
                                          const rom::PodBasis& basis,
                                          const ObservationOperator& H,
                                          const EstimatorConfig& config);

/// Runs an estimator over measurement columns y_1 .. y_K.
std::vector<EstimateStep> run_estimator(EstimatorKind kind, const rom::ModelBank& bank,
                                        const rom::PodBasis& basis, const ObservationOperator& H,
                                        const Matrix& measurements, const EstimatorConfig& config);

std::vector<EstimateStep> rrom_kf(const rom::ModelBank& bank, const rom::PodBasis& basis,
                                  const ObservationOperator& H, const Matrix& measurements,
                                  const EstimatorConfig& config = {});
std::vector<EstimateStep> aprom_jkf(const rom::ModelBank& bank, const rom::PodBasis& basis,
                                    const ObservationOperator& H, const Matrix& measurements,
                                    const EstimatorConfig& config = {});
std::vector<EstimateStep> aprom_mkf(const rom::ModelBank& bank, const rom::PodBasis& basis,
                                    const ObservationOperator& H, const Matrix& measurements,
                                    const EstimatorConfig& config = {});

}  // namespace polyrom::estimation
