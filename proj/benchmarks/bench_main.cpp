#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "polyrom/burgers.hpp"
#include "polyrom/kalman.hpp"
#include "polyrom/model_bank.hpp"
#include "polyrom/rng.hpp"

using namespace polyrom;

namespace {

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    CounterRng rng(seed);
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
    return m;
}

pde::SpectralField smooth_state(const pde::BurgersSolver& solver, int n) {
    Vector u(n);
    for (int j = 0; j < n; ++j) u(j) = std::sin(2.0 * std::numbers::pi * j / n) + 0.3 * std::cos(6.0 * std::numbers::pi * j / n);
    return solver.to_spectral(u);
}

void BM_BurgersRhs(benchmark::State& state) {
    pde::BurgersConfig cfg;
    cfg.grid_size = static_cast<int>(state.range(0));
    pde::BurgersSolver solver(cfg);
    const auto u = smooth_state(solver, cfg.grid_size);
    for (auto _ : state) benchmark::DoNotOptimize(solver.rhs(u, 0.0, 0.5));
}
BENCHMARK(BM_BurgersRhs)->Arg(128)->Arg(256)->Arg(512);

void BM_BurgersStep(benchmark::State& state) {
    pde::BurgersConfig cfg;
    cfg.grid_size = static_cast<int>(state.range(0));
    pde::BurgersSolver solver(cfg);
    auto u = smooth_state(solver, cfg.grid_size);
    for (auto _ : state) benchmark::DoNotOptimize(solver.step(u, 0.0, 0.5, cfg.dt_solver));
}
BENCHMARK(BM_BurgersStep)->Arg(256);

void BM_PolytopicMatrix(benchmark::State& state) {
    rom::ModelBank bank;
    const Eigen::Index r = state.range(0);
    for (int i = 0; i < 6; ++i) {
        bank.p_train.push_back(0.2 * i);
        bank.A_local.push_back(gaussian(r, r, 10 + i));
    }
    bank.A_robust = gaussian(r, r, 3);
    double p = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(rom::polytopic_matrix(p, bank));
        p = p > 1.0 ? 0.0 : p + 0.013;
    }
}
BENCHMARK(BM_PolytopicMatrix)->Arg(10)->Arg(40);

void BM_UkfStep(benchmark::State& state) {
    const Eigen::Index n = state.range(0);
    const Matrix A = 0.1 * gaussian(n, n, 1) + 0.9 * Matrix::Identity(n, n);
    const Matrix H = gaussian(4, n, 2);
    const auto f = [&](const Vector& x) -> Vector { return A * x; };
    const auto h = [&](const Vector& x) -> Vector { return H * x; };
    estimation::GaussianBelief belief{Vector::Zero(n), Matrix::Identity(n, n)};
    const Vector y = Vector::Ones(4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(estimation::ukf_step(belief, f, h, y, estimation::NoiseConfig{}, estimation::UkfParams{}));
    }
}
BENCHMARK(BM_UkfStep)->Arg(11)->Arg(41);

}  // namespace

BENCHMARK_MAIN();
