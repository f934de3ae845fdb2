#include "polyrom/burgers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include <fftw3.h>

#include "polyrom/errors.hpp"
#include "polyrom/parallel.hpp"

namespace polyrom::pde {

namespace {

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

bool is_power_of_two(int n) {
    return n > 0 && (n & (n - 1)) == 0;
}

// Dormand-Prince 5(4), fifth-order weights. The seventh (FSAL) stage only
// feeds the embedded error estimate, which a fixed-step scheme does not need.
constexpr int kStages = 6;
constexpr std::array<double, kStages> kC = {0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0};
constexpr std::array<std::array<double, kStages>, kStages> kA = {{
    {0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0},
    {3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0},
    {44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0},
    {19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0},
    {9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0},
}};
constexpr std::array<double, kStages> kB = {35.0 / 384.0,   0.0,          500.0 / 1113.0,
                                            125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0};

}  // namespace

void BurgersConfig::validate() const {
    std::ostringstream msg;
    if (!is_power_of_two(grid_size) || grid_size < 8) {
        msg << "grid_size must be a power of two >= 8, got " << grid_size;
    } else if (!(domain_length > 0.0)) {
        msg << "domain_length must be positive, got " << domain_length;
    } else if (!(nu1 > 0.0) || !(nu1 <= nu2)) {
        msg << "viscosity bounds must satisfy 0 < nu1 <= nu2, got " << nu1 << ", " << nu2;
    } else if (!(omega1 <= omega2)) {
        msg << "frequency bounds must satisfy omega1 <= omega2, got " << omega1 << ", " << omega2;
    } else if (!(dt_solver > 0.0) || !(dt_snapshot > 0.0)) {
        msg << "time steps must be positive";
    } else if (std::abs(dt_snapshot / dt_solver - std::round(dt_snapshot / dt_solver)) > 1e-9 ||
               std::round(dt_snapshot / dt_solver) < 1.0) {
        msg << "dt_snapshot (" << dt_snapshot << ") must be an integer multiple of dt_solver ("
            << dt_solver << ")";
    } else if (!(transient_time >= 0.0)) {
        msg << "transient_time must be non-negative";
    } else if (!(cfl > 0.0)) {
        msg << "cfl must be positive";
    } else {
        return;
    }
    throw InvalidInput(msg.str());
}

double BurgersConfig::base_wavenumber() const {
    return 2.0 * std::numbers::pi / domain_length;
}

int BurgersConfig::base_substeps() const {
    return static_cast<int>(std::lround(dt_snapshot / dt_solver));
}

struct BurgersSolver::Fft {
    int n;
    fftw_complex* in;
    fftw_complex* out;
    fftw_plan forward;
    fftw_plan backward;

    explicit Fft(int size) : n(size) {
        std::lock_guard lock(fftw_planner_mutex());
        in = fftw_alloc_complex(static_cast<std::size_t>(n));
        out = fftw_alloc_complex(static_cast<std::size_t>(n));
        // FFTW_ESTIMATE keeps the chosen algorithm, and hence the rounding, run-independent.
        forward = fftw_plan_dft_1d(n, in, out, FFTW_FORWARD, FFTW_ESTIMATE);
        backward = fftw_plan_dft_1d(n, in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~Fft() {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(backward);
        fftw_destroy_plan(forward);
        fftw_free(out);
        fftw_free(in);
    }
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    SpectralField run(fftw_plan plan, const SpectralField& x) const {
        auto* src = reinterpret_cast<std::complex<double>*>(in);
        std::copy(x.data(), x.data() + n, src);
        fftw_execute(plan);
        const auto* dst = reinterpret_cast<const std::complex<double>*>(out);
        return Eigen::Map<const SpectralField>(dst, n);
    }
};

BurgersSolver::BurgersSolver(BurgersConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    const int n = cfg_.grid_size;
    const double k0 = cfg_.base_wavenumber();
    kappa_.resize(n);
    keep_.assign(static_cast<std::size_t>(n), true);
    const int cutoff = n / 3;
    for (int j = 0; j < n; ++j) {
        const int index = j < n / 2 ? j : j - n;
        kappa_(j) = k0 * index;
        const bool nyquist = (j == n / 2);
        const bool keep = !nyquist && (!cfg_.dealias || std::abs(index) <= cutoff);
        keep_[static_cast<std::size_t>(j)] = keep;
        if (keep) kappa_max_ = std::max(kappa_max_, std::abs(kappa_(j)));
    }
    fft_ = std::make_unique<Fft>(n);
}

BurgersSolver::~BurgersSolver() = default;
BurgersSolver::BurgersSolver(BurgersSolver&&) noexcept = default;
BurgersSolver& BurgersSolver::operator=(BurgersSolver&&) noexcept = default;

SpectralField BurgersSolver::to_spectral(const Vector& u) const {
    if (u.size() != cfg_.grid_size) {
        throw InvalidInput("state has " + std::to_string(u.size()) + " entries, expected " +
                           std::to_string(cfg_.grid_size));
    }
    return fft_->run(fft_->forward, u.cast<std::complex<double>>());
}

Vector BurgersSolver::to_physical(const SpectralField& u_hat) const {
    if (u_hat.size() != cfg_.grid_size) {
        throw InvalidInput("spectral field has " + std::to_string(u_hat.size()) +
                           " coefficients, expected " + std::to_string(cfg_.grid_size));
    }
    const SpectralField u = fft_->run(fft_->backward, u_hat) / static_cast<double>(cfg_.grid_size);
    const double scale = std::max(1.0, u.real().cwiseAbs().maxCoeff());
    if (u.imag().cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw NumericalError("inverse transform left an imaginary residue of " +
                             std::to_string(u.imag().cwiseAbs().maxCoeff()));
    }
    return u.real();
}

SpectralField BurgersSolver::advection(const SpectralField& u_hat) const {
    const int n = cfg_.grid_size;
    const SpectralField u = fft_->run(fft_->backward, u_hat) / static_cast<double>(n);
    const Vector half_sq = 0.5 * u.real().array().square();
    SpectralField out = fft_->run(fft_->forward, half_sq.cast<std::complex<double>>());
    const std::complex<double> minus_i(0.0, -1.0);
    for (int j = 0; j < n; ++j) {
        out(j) = keep_[static_cast<std::size_t>(j)] ? minus_i * kappa_(j) * out(j)
                                                    : std::complex<double>(0.0, 0.0);
    }
    return out;
}

SpectralField BurgersSolver::forcing(double t, double p) const {
    const int n = cfg_.grid_size;
    SpectralField f = SpectralField::Zero(n);
    if (cfg_.forcing_amplitude == 0.0) return f;
    // A sin(wt - kx) = (A/2i) (e^{i wt} e^{-ikx} - e^{-i wt} e^{ikx})
    const double phase = cfg_.frequency(p) * t;
    const std::complex<double> plus =
        std::complex<double>(0.0, 0.5 * cfg_.forcing_amplitude * n) * std::polar(1.0, -phase);
    f(1) = plus;
    f(n - 1) = std::conj(plus);
    return f;
}

SpectralField BurgersSolver::rhs(const SpectralField& u_hat, double t, double p) const {
    if (u_hat.size() != cfg_.grid_size) {
        throw InvalidInput("spectral field has " + std::to_string(u_hat.size()) +
                           " coefficients, expected " + std::to_string(cfg_.grid_size));
    }
    const double nu = cfg_.viscosity(p);
    SpectralField out = forcing(t, p);
    if (cfg_.nonlinear) out += advection(u_hat);
    out.array() -= nu * kappa_.array().square().cast<std::complex<double>>() * u_hat.array();
    return out;
}

SpectralField BurgersSolver::step(const SpectralField& u_hat, double t, double p, double h) const {
    if (u_hat.size() != cfg_.grid_size) {
        throw InvalidInput("spectral field has " + std::to_string(u_hat.size()) +
                           " coefficients, expected " + std::to_string(cfg_.grid_size));
    }
    const DecayTable& decay = decay_table(cfg_.viscosity(p), h);

    std::array<SpectralField, kStages> stage_rhs;
    for (int i = 0; i < kStages; ++i) {
        SpectralField stage = (decay.from_start[i] * u_hat.array()).matrix();
        for (int j = 0; j < i; ++j) {
            stage.array() += (h * kA[i][j]) * decay.between[i][j] * stage_rhs[j].array();
        }
        stage_rhs[i] = forcing(t + kC[i] * h, p);
        if (cfg_.nonlinear) stage_rhs[i] += advection(stage);
    }

    SpectralField next = (decay.full * u_hat.array()).matrix();
    for (int j = 0; j < kStages; ++j) {
        if (kB[j] == 0.0) continue;
        next.array() += (h * kB[j]) * decay.to_end[j] * stage_rhs[j].array();
    }
    if (!next.allFinite()) {
        throw SolverBlowup("non-finite state after step from t = " + std::to_string(t), t + h);
    }
    return next;
}

const BurgersSolver::DecayTable& BurgersSolver::decay_table(double nu, double h) const {
    if (decay_ && decay_->nu == nu && decay_->h == h) return *decay_;
    const Eigen::ArrayXd rate = nu * kappa_.array().square();
    auto factor = [&](double tau) { return (-rate * tau).exp(); };
    auto table = std::make_unique<DecayTable>();
    table->nu = nu;
    table->h = h;
    table->full = factor(h);
    for (int i = 0; i < kStages; ++i) {
        table->from_start[i] = factor(kC[i] * h);
        table->to_end[i] = factor((1.0 - kC[i]) * h);
        for (int j = 0; j < i; ++j) table->between[i][j] = factor((kC[i] - kC[j]) * h);
    }
    decay_ = std::move(table);
    return *decay_;
}

int BurgersSolver::substeps_for(const SpectralField& u_hat) const {
    const int base = cfg_.base_substeps();
    const double umax = to_physical(u_hat).cwiseAbs().maxCoeff();
    const double courant = cfg_.dt_solver * umax * kappa_max_;
    const int refine = std::max(1, static_cast<int>(std::ceil(courant / cfg_.cfl)));
    return base * refine;
}

Trajectory simulate_trajectory(double p, int n_snapshots, const BurgersConfig& cfg,
                               const SimulationOptions& options) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw InvalidInput("parameter p must lie in [0, 1], got " + std::to_string(p));
    }
    if (n_snapshots < 2) {
        throw InvalidInput("need at least 2 snapshots, got " + std::to_string(n_snapshots));
    }
    BurgersSolver solver(cfg);
    const int n = cfg.grid_size;

    SpectralField u_hat = SpectralField::Zero(n);
    if (options.u0) u_hat = solver.to_spectral(*options.u0);

    // Snapshot times are computed from indices so they carry no accumulated drift.
    const double interval = cfg.dt_snapshot;
    const long transient_intervals = std::lround(cfg.transient_time / interval);
    int max_substeps_recorded = 0;
    auto advance = [&](long index) {
        const double t = options.t_start + static_cast<double>(index) * interval;
        const int substeps = solver.substeps_for(u_hat);
        const double h = interval / substeps;
        for (int s = 0; s < substeps; ++s) {
            u_hat = solver.step(u_hat, t + s * h, p, h);
        }
        return substeps;
    };

    for (long i = 0; i < transient_intervals; ++i) advance(i);

    Trajectory traj;
    traj.p = p;
    traj.dt = interval;
    traj.t0 = options.t_start + static_cast<double>(transient_intervals) * interval;
    traj.snapshots.resize(n, n_snapshots);
    traj.snapshots.col(0) = solver.to_physical(u_hat);
    for (int k = 1; k < n_snapshots; ++k) {
        const int used = advance(transient_intervals + k - 1);
        max_substeps_recorded = std::max(max_substeps_recorded, used);
        traj.snapshots.col(k) = solver.to_physical(u_hat);
    }
    traj.substeps = max_substeps_recorded;
    return traj;
}

std::vector<Trajectory> generate_training_set(const std::vector<double>& p_values,
                                              int n_snapshots, const BurgersConfig& cfg,
                                              int jobs) {
    if (p_values.empty()) throw InvalidInput("parameter list is empty");
    for (std::size_t i = 0; i < p_values.size(); ++i) {
        if (!(p_values[i] >= 0.0 && p_values[i] <= 1.0)) {
            throw InvalidInput("training parameter " + std::to_string(p_values[i]) +
                               " outside [0, 1]");
        }
        if (i > 0 && !(p_values[i] > p_values[i - 1])) {
            throw InvalidInput("training parameters must be strictly increasing (index " +
                               std::to_string(i) + ")");
        }
    }
    cfg.validate();
    std::vector<Trajectory> out(p_values.size());
    parallel_for(p_values.size(), jobs, [&](std::size_t i) {
        out[i] = simulate_trajectory(p_values[i], n_snapshots, cfg);
    });
    return out;
}

}  // namespace polyrom::pde
