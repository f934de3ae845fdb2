#include <gtest/gtest.h>

#include <cmath>

#include "polyrom/errors.hpp"
#include "polyrom/estimators.hpp"
#include "polyrom/kalman.hpp"
#include "polyrom/rng.hpp"

using namespace polyrom;
using namespace polyrom::estimation;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, CounterRng& rng) {
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
    return m;
}

Matrix random_stable(Eigen::Index n, CounterRng& rng, double radius = 0.9) {
    Matrix A = random_matrix(n, n, rng);
    Eigen::EigenSolver<Matrix> es(A, false);
    return A * (radius / es.eigenvalues().cwiseAbs().maxCoeff());
}

Matrix random_spd(Eigen::Index n, CounterRng& rng) {
    const Matrix B = random_matrix(n, n, rng);
    return B * B.transpose() + 0.1 * Matrix::Identity(n, n);
}

// Textbook predict/update with the short-form covariance (I - K H) P.
GaussianBelief textbook_kf(const GaussianBelief& b, const Matrix& A, const Matrix& H, const Vector& y,
                           double q, double r) {
    const Eigen::Index n = b.dim();
    const Vector x = A * b.mean;
    const Matrix P = A * b.cov * A.transpose() + q * Matrix::Identity(n, n);
    const Matrix S = H * P * H.transpose() + r * Matrix::Identity(H.rows(), H.rows());
    const Matrix K = P * H.transpose() * S.inverse();
    return {x + K * (y - H * x), (Matrix::Identity(n, n) - K * H) * P};
}

rom::PodBasis identity_basis(Eigen::Index r) {
    rom::PodBasis basis;
    basis.U = Matrix::Identity(r, r);
    basis.sigma = Vector::Ones(r);
    basis.V = Matrix::Identity(r, r);
    basis.spectrum = Vector::Ones(r);
    return basis;
}

// Scalar polytopic toy: two local models A = 0.5 at p = 0 and A = 0.9 at p = 1.
struct ScalarToy {
    rom::ModelBank bank;
    rom::PodBasis basis = identity_basis(1);
    ObservationOperator H{Matrix::Identity(1, 1)};

    explicit ScalarToy(double epsilon) {
        bank.p_train = {0.0, 1.0};
        bank.A_local = {Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 0.9)};
        bank.A_robust = Matrix::Constant(1, 1, 0.7);
        bank.epsilon = epsilon;
    }

    Matrix measurements(double p_true, int steps, double process_std, double noise_std,
                        std::uint64_t seed) const {
        CounterRng rng(seed);
        const double a = rom::polytopic_matrix(p_true, bank)(0, 0);
        double x = 1.0;
        Matrix y(1, steps);
        for (int k = 0; k < steps; ++k) {
            x = a * x + process_std * rng.normal();
            y(0, k) = x + noise_std * rng.normal();
        }
        return y;
    }
};

EstimatorConfig toy_config() {
    EstimatorConfig c;
    c.noise.q_state = 0.09;
    c.noise.r_meas = 0.0025;
    c.param_innovation_inflation = 1.0;
    return c;
}

}  // namespace

TEST(KalmanFilter, MatchesTextbookForm) {
    CounterRng rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix A = random_stable(4, rng);
        const Matrix H = random_matrix(2, 4, rng);
        GaussianBelief b{random_matrix(4, 1, rng), random_spd(4, rng)};
        const Vector y = random_matrix(2, 1, rng);
        NoiseConfig noise{0.01, 0.0, 0.04};
        const auto got = kf_step(b, A, H, y, noise);
        const auto want = textbook_kf(b, A, H, y, 0.01, 0.04);
        EXPECT_LT((got.mean - want.mean).norm(), 1e-10);
        EXPECT_LT((got.cov - want.cov).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_NO_THROW(got.validate());
    }
}

TEST(KalmanFilter, RejectsShapeMismatch) {
    GaussianBelief b{Vector::Zero(3), Matrix::Identity(3, 3)};
    EXPECT_THROW(kf_step(b, Matrix::Identity(2, 2), Matrix::Identity(1, 3), Vector::Zero(1), {}), InvalidInput);
    EXPECT_THROW(kf_step(b, Matrix::Identity(3, 3), Matrix::Identity(1, 3), Vector::Zero(2), {}), InvalidInput);
    NoiseConfig bad;
    bad.r_meas = 0.0;
    EXPECT_THROW(bad.validate(), InvalidInput);
}

TEST(SigmaPoints, ReproduceMeanAndCovariance) {
    CounterRng rng(2);
    for (const UkfParams params : {UkfParams{1.0, 2.0, 0.0}, UkfParams{0.5, 2.0, 1.0}}) {
        GaussianBelief b{random_matrix(5, 1, rng), random_spd(5, rng)};
        const auto sp = sigma_points(b, params);
        EXPECT_EQ(sp.points.cols(), 11);
        const Vector mean = sp.points * sp.mean_weights;
        const Matrix d = sp.points.colwise() - mean;
        const Matrix cov = d * sp.cov_weights.asDiagonal() * d.transpose();
        EXPECT_NEAR(sp.mean_weights.sum(), 1.0, 1e-12);
        EXPECT_LT((mean - b.mean).norm(), 1e-10);
        EXPECT_LT((cov - b.cov).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(SigmaPoints, IndefiniteCovarianceIsRegularized) {
    GaussianBelief b{Vector::Zero(3), Matrix::Identity(3, 3)};
    b.cov(2, 2) = -1e-13;
    FilterDiagnostics diag;
    const auto sp = sigma_points(b, UkfParams{}, &diag);
    EXPECT_EQ(diag.regularizations, 1);
    EXPECT_TRUE(sp.points.allFinite());
}

TEST(UnscentedFilter, EqualsKalmanFilterOnLinearModels) {
    CounterRng rng(3);
    const Matrix A = random_stable(6, rng);
    const Matrix H = random_matrix(3, 6, rng);
    const NoiseConfig noise{1e-3, 0.0, 0.01};
    GaussianBelief kf{Vector::Zero(6), Matrix::Identity(6, 6)};
    GaussianBelief ukf = kf;
    const auto f = [&](const Vector& x) -> Vector { return A * x; };
    const auto h = [&](const Vector& x) -> Vector { return H * x; };
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const Vector y = random_matrix(3, 1, rng);
        kf = kf_step(kf, A, H, y, noise);
        ukf = ukf_step(ukf, f, h, y, noise, UkfParams{});
        worst = std::max({worst, (kf.mean - ukf.mean).cwiseAbs().maxCoeff(),
                          (kf.cov - ukf.cov).cwiseAbs().maxCoeff()});
    }
    EXPECT_LT(worst, 1e-8);
}

TEST(Estimators, NamesRoundTrip) {
    for (auto kind : all_estimators()) EXPECT_EQ(parse_estimator(estimator_name(kind)), kind);
    EXPECT_THROW(parse_estimator("EKF"), InvalidInput);
}

TEST(Estimators, RejectMismatchedOperators) {
    ScalarToy toy(1.0);
    ObservationOperator wide{Matrix::Identity(1, 2)};
    EXPECT_THROW(make_estimator(EstimatorKind::JointUkf, toy.bank, toy.basis, wide, {}), InvalidInput);
    auto est = make_estimator(EstimatorKind::ModularUkf, toy.bank, toy.basis, toy.H, {});
    EXPECT_THROW(est->step(Vector::Zero(2)), InvalidInput);
}

TEST(Estimators, ModularFilterLearnsNothingFromConstantBank) {
    ScalarToy toy(1.0);
    toy.bank.A_local = {Matrix::Constant(1, 1, 0.8), Matrix::Constant(1, 1, 0.8)};
    EstimatorConfig c = toy_config();
    ModularUkf est(toy.bank, toy.basis, toy.H, c);
    const Matrix y = toy.measurements(0.9, 50, 0.3, 0.05, 4);
    for (int k = 0; k < 50; ++k) {
        const auto out = est.step(y.col(k));
        EXPECT_NEAR(out.p_hat_raw, 0.5, 1e-12);
        EXPECT_NEAR(out.p_hat_var, 0.25 + (k + 1) * c.noise.q_param, 1e-12);
    }
}

TEST(Estimators, ModularParameterMovesTowardTruth) {
    ScalarToy toy(1.0);
    const double p_true = 0.9;
    const std::vector<int> checkpoints{10, 50, 150, 300};
    std::vector<double> mean_p(checkpoints.size(), 0.0);
    const int runs = 20;
    for (int s = 0; s < runs; ++s) {
        const Matrix y = toy.measurements(p_true, 300, 0.3, 0.05, 100 + s);
        const auto out = aprom_mkf(toy.bank, toy.basis, toy.H, y, toy_config());
        for (std::size_t c = 0; c < checkpoints.size(); ++c) mean_p[c] += out[checkpoints[c] - 1].p_hat / runs;
    }
    double previous = std::abs(0.5 - p_true);
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        const double gap = std::abs(mean_p[c] - p_true);
        EXPECT_LT(gap, previous) << "checkpoint " << checkpoints[c];
        previous = gap;
    }
}

TEST(Estimators, JointAndModularAgreeOnScalarToy) {
    ScalarToy toy(1.0);
    for (double p_true : {0.2, 0.7}) {
        const Matrix y = toy.measurements(p_true, 600, 0.3, 0.05, 7);
        const double joint = aprom_jkf(toy.bank, toy.basis, toy.H, y, toy_config()).back().p_hat;
        const double modular = aprom_mkf(toy.bank, toy.basis, toy.H, y, toy_config()).back().p_hat;
        EXPECT_LT(std::abs(joint - modular), 0.1) << "p = " << p_true;
    }
}

TEST(Estimators, JointFilterWithSingleModelMatchesRobustKf) {
    CounterRng rng(5);
    rom::ModelBank bank;
    bank.p_train = {0.5};
    bank.A_local = {random_stable(3, rng)};
    bank.A_robust = bank.A_local[0];
    const auto basis = identity_basis(3);
    ObservationOperator H{random_matrix(2, 3, rng)};
    const Matrix y = random_matrix(2, 100, rng);
    EstimatorConfig c;
    const auto joint = aprom_jkf(bank, basis, H, y, c);
    const auto robust = rrom_kf(bank, basis, H, y, c);
    for (std::size_t k = 0; k < joint.size(); ++k) {
        EXPECT_LT((joint[k].x_hat - robust[k].x_hat).cwiseAbs().maxCoeff(), 1e-8) << "step " << k;
    }
    EXPECT_TRUE(std::isnan(robust.front().p_hat));
}

TEST(Estimators, JointFilterStaysInDriftBandOnSelfConsistentData) {
    rom::ModelBank bank;
    bank.p_train = {0.0, 0.5, 1.0};
    bank.A_local = {Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 0.7), Matrix::Constant(1, 1, 0.9)};
    bank.A_robust = Matrix::Constant(1, 1, 0.7);
    bank.epsilon = 1.0;
    const auto basis = identity_basis(1);
    ObservationOperator H{Matrix::Identity(1, 1)};

    const double p = 0.3;
    CounterRng rng(9);
    const double a = rom::polytopic_matrix(p, bank)(0, 0);
    double x = 1.0;
    Matrix y(1, 200);
    for (int k = 0; k < 200; ++k) {
        x = a * x + 0.3 * rng.normal();
        y(0, k) = x + 0.05 * rng.normal();
    }
    EstimatorConfig c = toy_config();
    c.initial_param = p;
    c.initial_param_var = c.noise.q_param;
    const auto out = aprom_jkf(bank, basis, H, y, c);
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double band = 2.0 * std::sqrt(c.noise.q_param * static_cast<double>(k + 1));
        EXPECT_LE(std::abs(out[k].p_hat - p), band) << "step " << k + 1;
    }
}

TEST(Estimators, CovariancesStaySymmetricPsd) {
    ScalarToy toy(0.01);
    const Matrix y = toy.measurements(0.35, 300, 0.3, 0.05, 12);
    for (auto kind : all_estimators()) {
        auto est = make_estimator(kind, toy.bank, toy.basis, toy.H, toy_config());
        for (Eigen::Index k = 0; k < y.cols(); ++k) {
            const auto out = est->step(y.col(k));
            GaussianBelief b{Vector::Zero(out.cov.rows()), out.cov};
            ASSERT_NO_THROW(b.validate()) << estimator_name(kind) << " step " << k;
            if (kind != EstimatorKind::RobustKf) {
                EXPECT_GE(out.p_hat, 0.0);
                EXPECT_LE(out.p_hat, 1.0);
                EXPECT_GE(out.p_hat_var, 0.0);
            }
        }
    }
}
