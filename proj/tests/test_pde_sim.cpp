#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "polyrom/burgers.hpp"
#include "polyrom/errors.hpp"
#include "polyrom/rng.hpp"
#include "polyrom/sensors.hpp"

using namespace polyrom;
using namespace polyrom::pde;

namespace {

constexpr double kPi = std::numbers::pi;

Vector grid(int n, double L = 1.0) {
    Vector x(n);
    for (int j = 0; j < n; ++j) x(j) = L * j / n;
    return x;
}

Vector single_mode(int n, double amplitude = 1.0) {
    const Vector x = grid(n);
    return amplitude * (2.0 * kPi * x.array()).sin().matrix();
}

BurgersConfig unforced(int n = 64) {
    BurgersConfig cfg;
    cfg.grid_size = n;
    cfg.forcing_amplitude = 0.0;
    return cfg;
}

// Reference splitmix64 finalizer (Steele, Lea and Flood).
std::uint64_t reference_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

TEST(BurgersConfig, DefaultsAreValid) {
    BurgersConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    EXPECT_EQ(cfg.grid_size, 256);
    EXPECT_DOUBLE_EQ(cfg.viscosity(0.5), 0.055);
    EXPECT_DOUBLE_EQ(cfg.frequency(1.0), 0.4 * kPi);
    EXPECT_EQ(cfg.base_substeps(), 1);
}

TEST(BurgersConfig, RejectsBadInvariants) {
    auto bad = [](auto mutate) {
        BurgersConfig cfg;
        mutate(cfg);
        EXPECT_THROW(cfg.validate(), InvalidInput);
    };
    bad([](BurgersConfig& c) { c.grid_size = 100; });
    bad([](BurgersConfig& c) { c.grid_size = 4; });
    bad([](BurgersConfig& c) { c.nu1 = 0.0; });
    bad([](BurgersConfig& c) { c.nu2 = 0.001; });
    bad([](BurgersConfig& c) { c.omega2 = 0.1; });
    bad([](BurgersConfig& c) { c.domain_length = -1.0; });
    bad([](BurgersConfig& c) { c.dt_snapshot = 0.07; });
}

TEST(BurgersRhs, ZeroFieldGivesForcing) {
    BurgersConfig cfg;
    BurgersSolver solver(cfg);
    const int n = cfg.grid_size;
    for (double p : {0.0, 0.37, 1.0}) {
        const Vector f = solver.to_physical(solver.rhs(SpectralField::Zero(n), 0.0, p));
        const Vector expected = (-2.0 * kPi * grid(n).array()).sin().matrix() * 2.0;
        EXPECT_LT((f - expected).cwiseAbs().maxCoeff(), 1e-12) << "p = " << p;
    }
}

TEST(BurgersRhs, SingleModeMatchesSymbolicDerivative) {
    BurgersConfig cfg = unforced(128);
    BurgersSolver solver(cfg);
    const double k = 2.0 * kPi;
    const double nu = cfg.viscosity(1.0);
    const Vector x = grid(cfg.grid_size);
    const Vector u = (k * x.array()).sin();

    const Vector du = solver.to_physical(solver.rhs(solver.to_spectral(u), 0.0, 1.0));
    const Vector expected =
        (-nu * k * k * (k * x.array()).sin() - 0.5 * k * (2.0 * k * x.array()).sin()).matrix();
    EXPECT_LT((du - expected).cwiseAbs().maxCoeff(), 1e-10);

    const Vector adv = solver.to_physical(solver.advection(solver.to_spectral(u)));
    EXPECT_LT((adv + 0.5 * k * (2.0 * k * x.array()).sin().matrix()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(BurgersRhs, MeanIsConservedWithoutForcing) {
    BurgersConfig cfg = unforced(64);
    BurgersSolver solver(cfg);
    CounterRng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        Vector u(cfg.grid_size);
        for (auto& v : u) v = rng.normal();
        const SpectralField du = solver.rhs(solver.to_spectral(u), 0.3, 0.2);
        EXPECT_LT(std::abs(du(0)), 1e-11 * solver.to_spectral(u).cwiseAbs().maxCoeff());
    }
}

TEST(BurgersRhs, DealiasingZeroesUpperThird) {
    BurgersConfig cfg;
    BurgersSolver solver(cfg);
    const int n = cfg.grid_size;
    CounterRng rng(11);
    Vector u(n);
    for (auto& v : u) v = rng.normal();
    const SpectralField adv = solver.advection(solver.to_spectral(u));
    int zeroed = 0;
    for (int j = 0; j < n; ++j) {
        const int index = j <= n / 2 ? j : j - n;
        if (std::abs(index) > n / 3 || j == n / 2) {
            EXPECT_EQ(adv(j), std::complex<double>(0.0, 0.0)) << "mode " << index;
            ++zeroed;
        }
    }
    EXPECT_GE(zeroed, n / 3);
}

TEST(BurgersRhs, RejectsWrongSize) {
    BurgersSolver solver(BurgersConfig{});
    EXPECT_THROW(solver.rhs(SpectralField::Zero(10), 0.0, 0.5), InvalidInput);
    EXPECT_THROW(solver.step(SpectralField::Zero(10), 0.0, 0.5, 0.05), InvalidInput);
    EXPECT_THROW(solver.to_spectral(Vector::Zero(3)), InvalidInput);
}

TEST(BurgersStep, PureDecayMatchesExponential) {
    BurgersConfig cfg = unforced(64);
    cfg.nonlinear = false;
    BurgersSolver solver(cfg);
    const double k = 2.0 * kPi;
    for (double p : {0.0, 0.5, 1.0}) {
        const double nu = cfg.viscosity(p);
        const SpectralField u0 = solver.to_spectral(single_mode(cfg.grid_size));
        const SpectralField u1 = solver.step(u0, 0.0, p, cfg.dt_solver);
        const double ratio = std::abs(u1(1)) / std::abs(u0(1));
        EXPECT_NEAR(ratio, std::exp(-nu * k * k * cfg.dt_solver), 1e-12);
    }
}

TEST(BurgersStep, ZeroStaysZero) {
    BurgersConfig cfg = unforced(64);
    BurgersSolver solver(cfg);
    const SpectralField u = solver.step(SpectralField::Zero(64), 1.0, 0.5, 0.05);
    EXPECT_EQ(u.cwiseAbs().maxCoeff(), 0.0);
}

TEST(BurgersStep, LinearFlowIsReversible) {
    BurgersConfig cfg = unforced(16);
    cfg.nonlinear = false;
    BurgersSolver solver(cfg);
    CounterRng rng(3);
    Vector u(16);
    for (auto& v : u) v = rng.normal();
    const SpectralField u0 = solver.to_spectral(u);
    const SpectralField forward = solver.step(u0, 0.0, 0.5, 0.05);
    const SpectralField back = solver.step(forward, 0.05, 0.5, -0.05);
    EXPECT_LT((solver.to_physical(back) - u).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(BurgersStep, HeatLimitDecayRateOverHundredSteps) {
    BurgersConfig cfg = unforced(256);
    cfg.nonlinear = false;
    BurgersSolver solver(cfg);
    const double k = 2.0 * kPi;
    const double p = 0.5;
    SpectralField u = solver.to_spectral(single_mode(cfg.grid_size));
    const double a0 = std::abs(u(1));
    for (int s = 0; s < 100; ++s) u = solver.step(u, s * cfg.dt_solver, p, cfg.dt_solver);
    const double t = 100 * cfg.dt_solver;
    const double measured_rate = -std::log(std::abs(u(1)) / a0) / t;
    const double exact_rate = cfg.viscosity(p) * k * k;
    EXPECT_LT(std::abs(measured_rate - exact_rate) / exact_rate, 1e-6);
}

TEST(BurgersStep, BlowupCarriesTime) {
    BurgersConfig cfg = unforced(16);
    BurgersSolver solver(cfg);
    SpectralField u = SpectralField::Zero(16);
    u(1) = std::complex<double>(std::nan(""), 0.0);
    try {
        solver.step(u, 2.5, 0.5, 0.05);
        FAIL() << "expected SolverBlowup";
    } catch (const SolverBlowup& e) {
        EXPECT_NEAR(e.time(), 2.55, 1e-12);
    }
}

TEST(Simulate, MinimalTrajectoryAndDeterminism) {
    BurgersConfig cfg;
    cfg.grid_size = 32;
    cfg.transient_time = 2.0;
    const Trajectory a = simulate_trajectory(0.4, 2, cfg);
    EXPECT_EQ(a.snapshot_count(), 2);
    EXPECT_EQ(a.state_dim(), 32);
    EXPECT_DOUBLE_EQ(a.dt, 0.05);
    EXPECT_NEAR(a.t0, 2.0, 1e-12);
    EXPECT_GE(a.substeps, 1);
    const Trajectory b = simulate_trajectory(0.4, 2, cfg);
    EXPECT_TRUE(a.snapshots == b.snapshots);
    EXPECT_THROW(simulate_trajectory(0.4, 1, cfg), InvalidInput);
    EXPECT_THROW(simulate_trajectory(1.5, 5, cfg), InvalidInput);
}

TEST(Simulate, InitialConditionIsUsed) {
    BurgersConfig cfg = unforced(32);
    cfg.transient_time = 0.0;
    SimulationOptions opt;
    opt.u0 = single_mode(32, 0.3);
    const Trajectory t = simulate_trajectory(0.5, 3, cfg, opt);
    EXPECT_LT((t.snapshots.col(0) - *opt.u0).norm(), 1e-13);
    EXPECT_LT(t.snapshots.col(2).norm(), t.snapshots.col(0).norm());
}

TEST(Simulate, PostTransientTrajectoryIsPeriodic) {
    BurgersConfig cfg;
    for (double p : {0.0, 0.5, 1.0}) {
        const int period = static_cast<int>(std::lround(2.0 * kPi / cfg.frequency(p) / cfg.dt_snapshot));
        const Trajectory t = simulate_trajectory(p, period + 40, cfg);
        double worst = 0.0;
        for (int k = 0; k + period < t.snapshot_count(); ++k) {
            worst = std::max(worst, (t.snapshots.col(k + period) - t.snapshots.col(k)).norm() /
                                        t.snapshots.col(k).norm());
        }
        EXPECT_LT(worst, 0.05) << "p = " << p;
    }
}

TEST(TrainingSet, ShapesOrderAndParallelDeterminism) {
    BurgersConfig cfg;
    cfg.grid_size = 32;
    cfg.transient_time = 1.0;
    const std::vector<double> ps{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    const auto serial = generate_training_set(ps, 5, cfg, 1);
    const auto parallel = generate_training_set(ps, 5, cfg, 3);
    ASSERT_EQ(serial.size(), 6u);
    Eigen::Index total = 0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        EXPECT_EQ(serial[i].p, ps[i]);
        EXPECT_EQ(serial[i].dt, serial[0].dt);
        EXPECT_TRUE(serial[i].snapshots == parallel[i].snapshots);
        total += serial[i].snapshot_count();
    }
    EXPECT_EQ(total, 6 * 5);
    EXPECT_EQ(generate_training_set({0.3}, 2, cfg).size(), 1u);
}

TEST(TrainingSet, RejectsBadGrids) {
    BurgersConfig cfg;
    cfg.grid_size = 16;
    EXPECT_THROW(generate_training_set({}, 3, cfg), InvalidInput);
    EXPECT_THROW(generate_training_set({0.2, 0.2}, 3, cfg), InvalidInput);
    EXPECT_THROW(generate_training_set({0.4, 0.2}, 3, cfg), InvalidInput);
    EXPECT_THROW(generate_training_set({0.0, 1.2}, 3, cfg), InvalidInput);
}

TEST(Sensors, EquallySpacedIndices) {
    const auto s = SensorModel::equally_spaced(256, 4, 0.05);
    EXPECT_EQ(s.indices, (std::vector<int>{0, 64, 128, 192}));
    const auto odd = SensorModel::equally_spaced(10, 3, 0.0);
    EXPECT_EQ(odd.indices, (std::vector<int>{0, 3, 6}));
    SensorModel dup{{1, 1}, 0.1, 0};
    EXPECT_THROW(dup.validate(8), InvalidInput);
    SensorModel out{{9}, 0.1, 0};
    EXPECT_THROW(out.validate(8), InvalidInput);
    SensorModel neg{{1}, -0.1, 0};
    EXPECT_THROW(neg.validate(8), InvalidInput);
}

TEST(Sensors, NoiselessMeasurementSubsamples) {
    Vector z = Vector::LinSpaced(16, 0.0, 15.0);
    const auto s = SensorModel::equally_spaced(16, 4, 0.0);
    CounterRng rng(5);
    const Vector y = measure(z, s, rng);
    EXPECT_EQ(y, (Vector(4) << 0.0, 4.0, 8.0, 12.0).finished());
}

TEST(Sensors, NoiseIsReproducibleAndHasRequestedSpread) {
    const auto s = SensorModel::equally_spaced(8, 1, 0.05);
    const Vector z = Vector::Constant(8, 1.5);
    CounterRng a(99), b(99);
    EXPECT_EQ(measure(z, s, a), measure(z, s, b));

    CounterRng rng(2024);
    const int draws = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < draws; ++i) {
        const double e = measure(z, s, rng)(0) - 1.5;
        sum += e;
        sq += e * e;
    }
    const double mean = sum / draws;
    const double std = std::sqrt(sq / draws - mean * mean);
    EXPECT_NEAR(std, 0.05, 0.05 * 0.02);
}

TEST(Rng, MatchesReferenceSplitMix) {
    CounterRng rng(123);
    std::uint64_t state = 123;
    for (int i = 0; i < 5; ++i) {
        state += 0x9E3779B97F4A7C15ULL;
        EXPECT_EQ(rng.next_u64(), reference_mix(state));
    }
    CounterRng u(42);
    for (int i = 0; i < 1000; ++i) {
        const double v = u.uniform();
        EXPECT_GT(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
    EXPECT_NE(derive_seed(1, {2, 3}), derive_seed(1, {3, 2}));
    EXPECT_EQ(derive_seed(1, {2, 3}), derive_seed(1, {2, 3}));
}
