#include "polyrom/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "polyrom/errors.hpp"

namespace polyrom::estimation {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_measurement(const Vector& y, const ObservationOperator& H) {
    if (y.size() != H.measurement_dim()) {
        throw InvalidInput("measurement has " + std::to_string(y.size()) + " entries, expected " +
                           std::to_string(H.measurement_dim()));
    }
}

void check_operator(const rom::ModelBank& bank, const rom::PodBasis& basis,
                    const ObservationOperator& H) {
    bank.validate();
    if (bank.rank() != basis.rank()) {
        throw InvalidInput("model bank rank " + std::to_string(bank.rank()) +
                           " does not match POD rank " + std::to_string(basis.rank()));
    }
    if (H.H.cols() != basis.rank()) {
        throw InvalidInput("observation operator has " + std::to_string(H.H.cols()) +
                           " columns, expected " + std::to_string(basis.rank()));
    }
}

double initial_param_var(const rom::ModelBank& bank, const EstimatorConfig& config) {
    if (config.initial_param_var) return *config.initial_param_var;
    const double half = 0.5 * (bank.p_max - bank.p_min);
    return half * half;
}

double initial_param(const rom::ModelBank& bank, const EstimatorConfig& config) {
    return config.initial_param ? *config.initial_param : bank.mean_training_parameter();
}

}  // namespace

std::string_view estimator_name(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::RobustKf: return "rROM-KF";
        case EstimatorKind::JointUkf: return "apROM-jKF";
        case EstimatorKind::ModularUkf: return "apROM-mKF";
    }
    return "unknown";
}

EstimatorKind parse_estimator(std::string_view name) {
    for (EstimatorKind kind : all_estimators()) {
        if (estimator_name(kind) == name) return kind;
    }
    throw InvalidInput("unknown estimator '" + std::string(name) +
                       "' (expected rROM-KF, apROM-jKF or apROM-mKF)");
}

const std::vector<EstimatorKind>& all_estimators() {
    static const std::vector<EstimatorKind> kinds = {
        EstimatorKind::RobustKf, EstimatorKind::JointUkf, EstimatorKind::ModularUkf};
    return kinds;
}

// rROM-KF

RobustKf::RobustKf(const rom::ModelBank& bank, const rom::PodBasis& basis, ObservationOperator H,
                   EstimatorConfig config)
    : bank_(bank), basis_(basis), H_(std::move(H)), config_(config) {
    check_operator(bank_, basis_, H_);
    config_.noise.validate();
    const Eigen::Index r = basis_.rank();
    state_.mean = Vector::Zero(r);
    state_.cov = config_.initial_state_var * Matrix::Identity(r, r);
}

EstimateStep RobustKf::step(const Vector& y) {
    check_measurement(y, H_);
    state_ = kf_step(state_, bank_.A_robust, H_.H, y, config_.noise);
    EstimateStep out;
    out.x_hat = state_.mean;
    out.z_hat = rom::lift(state_.mean, basis_);
    out.p_hat = out.p_hat_raw = out.p_hat_var = kNaN;
    out.cov = state_.cov;
    return out;
}

// apROM-jKF

JointUkf::JointUkf(const rom::ModelBank& bank, const rom::PodBasis& basis, ObservationOperator H,
                   EstimatorConfig config)
    : bank_(bank), basis_(basis), H_(std::move(H)), config_(config) {
    check_operator(bank_, basis_, H_);
    config_.noise.validate();
    const Eigen::Index r = basis_.rank();
    config_.ukf.validate(r + 1);

    joint_.mean = Vector::Zero(r + 1);
    joint_.mean(r) = initial_param(bank_, config_);
    joint_.cov = Matrix::Zero(r + 1, r + 1);
    joint_.cov.topLeftCorner(r, r) = config_.initial_state_var * Matrix::Identity(r, r);
    joint_.cov(r, r) = initial_param_var(bank_, config_);

    Q_ = Matrix::Zero(r + 1, r + 1);
    Q_.diagonal().head(r).setConstant(config_.noise.q_state);
    Q_(r, r) = config_.noise.q_param;
    R_ = config_.noise.r_meas * Matrix::Identity(H_.measurement_dim(), H_.measurement_dim());
}

EstimateStep JointUkf::step(const Vector& y) {
    check_measurement(y, H_);
    const Eigen::Index r = basis_.rank();
    const auto f = [&](const Vector& joint) {
        Vector next(r + 1);
        next.head(r) = rom::polytopic_matrix(joint(r), bank_) * joint.head(r);
        next(r) = joint(r);
        return next;
    };
    const auto h = [&](const Vector& joint) -> Vector { return H_.H * joint.head(r); };

    joint_ = ukf_step(joint_, f, h, y, Q_, R_, config_.ukf, &diagnostics_);
    if (joint_.cov(r, r) < config_.param_var_collapse) {
        joint_.cov(r, r) = config_.noise.q_param;
        ++reinflations_;
    }
    if (config_.project_parameter) joint_.mean(r) = std::clamp(joint_.mean(r), bank_.p_min, bank_.p_max);

    EstimateStep out;
    out.x_hat = joint_.mean.head(r);
    out.z_hat = rom::lift(out.x_hat, basis_);
    out.p_hat_raw = joint_.mean(r);
    out.p_hat = std::clamp(out.p_hat_raw, bank_.p_min, bank_.p_max);
    out.p_hat_var = joint_.cov(r, r);
    out.cov = joint_.cov;
    return out;
}

// apROM-mKF

ModularUkf::ModularUkf(const rom::ModelBank& bank, const rom::PodBasis& basis,
                       ObservationOperator H, EstimatorConfig config)
    : bank_(bank), basis_(basis), H_(std::move(H)), config_(config) {
    check_operator(bank_, basis_, H_);
    config_.noise.validate();
    config_.ukf.validate(1);
    if (!(config_.param_innovation_inflation >= 1.0)) {
        throw InvalidInput("param_innovation_inflation must be at least 1");
    }
    const Eigen::Index r = basis_.rank();
    state_.mean = Vector::Zero(r);
    state_.cov = config_.initial_state_var * Matrix::Identity(r, r);
    param_.mean = Vector::Constant(1, initial_param(bank_, config_));
    param_.cov = Matrix::Constant(1, 1, initial_param_var(bank_, config_));
}

EstimateStep ModularUkf::step(const Vector& y) {
    check_measurement(y, H_);

    // Parameter filter first, observing y_k through the previous state estimate.
    const Vector x_prev = state_.mean;
    const auto f = [](const Vector& p) -> Vector { return p; };
    const auto h = [&](const Vector& p) -> Vector {
        return H_.H * (rom::polytopic_matrix(p(0), bank_) * x_prev);
    };
    const Matrix Q = Matrix::Constant(1, 1, config_.noise.q_param);
    // The observation also carries the uncertainty of x_{k-1} and the state
    // process noise, propagated at the current parameter estimate.
    const Matrix A_prev = rom::polytopic_matrix(param_.mean(0), bank_);
    Matrix state_spread = A_prev * state_.cov * A_prev.transpose();
    state_spread.diagonal().array() += config_.noise.q_state;
    Matrix R = H_.H * state_spread * H_.H.transpose();
    R.diagonal().array() += config_.noise.r_meas;
    R *= config_.param_innovation_inflation;
    R = symmetrized(R);
    param_ = ukf_step(param_, f, h, y, Q, R, config_.ukf, &diagnostics_);
    if (param_.cov(0, 0) < config_.param_var_collapse) {
        param_.cov(0, 0) = config_.noise.q_param;
        ++reinflations_;
    }
    if (config_.project_parameter) param_.mean(0) = std::clamp(param_.mean(0), bank_.p_min, bank_.p_max);

    // State filter with the fresh parameter estimate.
    const Matrix A = rom::polytopic_matrix(param_.mean(0), bank_);
    state_ = kf_step(state_, A, H_.H, y, config_.noise);

    EstimateStep out;
    out.x_hat = state_.mean;
    out.z_hat = rom::lift(state_.mean, basis_);
    out.p_hat_raw = param_.mean(0);
    out.p_hat = std::clamp(out.p_hat_raw, bank_.p_min, bank_.p_max);
    out.p_hat_var = param_.cov(0, 0);
    out.cov = state_.cov;
    return out;
}

std::unique_ptr<Estimator> make_estimator(EstimatorKind kind, const rom::ModelBank& bank,
                                          const rom::PodBasis& basis,
                                          const ObservationOperator& H,
                                          const EstimatorConfig& config) {
    switch (kind) {
        case EstimatorKind::RobustKf: return std::make_unique<RobustKf>(bank, basis, H, config);
        case EstimatorKind::JointUkf: return std::make_unique<JointUkf>(bank, basis, H, config);
        case EstimatorKind::ModularUkf:
            return std::make_unique<ModularUkf>(bank, basis, H, config);
    }
    throw InvalidInput("unknown estimator kind");
}

std::vector<EstimateStep> run_estimator(EstimatorKind kind, const rom::ModelBank& bank,
                                        const rom::PodBasis& basis, const ObservationOperator& H,
                                        const Matrix& measurements,
                                        const EstimatorConfig& config) {
    if (measurements.rows() != H.measurement_dim()) {
        throw InvalidInput("measurement stream has " + std::to_string(measurements.rows()) +
                           " rows, expected " + std::to_string(H.measurement_dim()));
    }
    auto estimator = make_estimator(kind, bank, basis, H, config);
    std::vector<EstimateStep> out;
    out.reserve(static_cast<std::size_t>(measurements.cols()));
    for (Eigen::Index k = 0; k < measurements.cols(); ++k) {
        out.push_back(estimator->step(measurements.col(k)));
    }
    return out;
}

std::vector<EstimateStep> rrom_kf(const rom::ModelBank& bank, const rom::PodBasis& basis,
                                  const ObservationOperator& H, const Matrix& measurements,
                                  const EstimatorConfig& config) {
    return run_estimator(EstimatorKind::RobustKf, bank, basis, H, measurements, config);
}

std::vector<EstimateStep> aprom_jkf(const rom::ModelBank& bank, const rom::PodBasis& basis,
                                    const ObservationOperator& H, const Matrix& measurements,
                                    const EstimatorConfig& config) {
    return run_estimator(EstimatorKind::JointUkf, bank, basis, H, measurements, config);
}

std::vector<EstimateStep> aprom_mkf(const rom::ModelBank& bank, const rom::PodBasis& basis,
                                    const ObservationOperator& H, const Matrix& measurements,
                                    const EstimatorConfig& config) {
    return run_estimator(EstimatorKind::ModularUkf, bank, basis, H, measurements, config);
}

}  // namespace polyrom::estimation
