#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "polyrom/linalg.hpp"
#include "polyrom/trajectory.hpp"

namespace polyrom::pde {

using SpectralField = Eigen::VectorXcd;

/// Forced periodic Burgers problem u_t + u u_x - nu u_xx = A sin(omega t - k x)
/// with nu and omega mapped linearly from a scalar parameter p in [0, 1].
struct BurgersConfig {
    double domain_length = 1.0;
    int grid_size = 256;
    double nu1 = 0.01;
    double nu2 = 0.1;
    double omega1 = 0.2 * 3.14159265358979323846;
    double omega2 = 0.4 * 3.14159265358979323846;
    double forcing_amplitude = 2.0;
    double dt_solver = 0.05;
    double dt_snapshot = 0.05;
    double transient_time = 200.0;
    /// Advective Courant limit h * max|u| * kappa_max used to pick sub-steps.
    double cfl = 1.0;
    bool dealias = true;
    /// When false the advective term is dropped, leaving the forced heat equation.
    bool nonlinear = true;

    /// Throws InvalidInput when an invariant is violated.
    void validate() const;

    double viscosity(double p) const { return nu1 + (nu2 - nu1) * p; }
    double frequency(double p) const { return omega1 + (omega2 - omega1) * p; }
    double base_wavenumber() const;
    /// dt_snapshot / dt_solver, rounded.
    int base_substeps() const;
};

/// Pseudospectral right-hand side and fixed-step time integrator.
///
/// Spectral fields hold the unnormalized forward DFT of the grid values
/// (n complex coefficients, FFTW ordering). Viscous decay is integrated
/// exactly through an integrating factor; the advective and forcing terms go
/// through the Dormand-Prince fifth-order stages. Instances own FFT plans and
/// scratch buffers, so one solver must not be shared between threads.
class BurgersSolver {
public:
    explicit BurgersSolver(BurgersConfig cfg);
    ~BurgersSolver();
    BurgersSolver(const BurgersSolver&) = delete;
    BurgersSolver& operator=(const BurgersSolver&) = delete;
    BurgersSolver(BurgersSolver&&) noexcept;
    BurgersSolver& operator=(BurgersSolver&&) noexcept;

    const BurgersConfig& config() const noexcept { return cfg_; }
    int size() const noexcept { return cfg_.grid_size; }

    /// Angular wavenumbers in FFT ordering.
    const Vector& wavenumbers() const noexcept { return kappa_; }
    /// True where a coefficient survives the 2/3 rule.
    bool retained(Eigen::Index j) const { return keep_[static_cast<std::size_t>(j)]; }
    double max_retained_wavenumber() const noexcept { return kappa_max_; }

    SpectralField to_spectral(const Vector& u) const;
    /// Inverse transform; throws NumericalError if the imaginary residue exceeds 1e-12 relative.
    Vector to_physical(const SpectralField& u_hat) const;

    /// Time derivative of the spectral field: -FFT(u u_x) - nu kappa^2 u_hat + f_hat(t).
    SpectralField rhs(const SpectralField& u_hat, double t, double p) const;
    /// Dealiased advective term -FFT(d/dx (u^2 / 2)).
    SpectralField advection(const SpectralField& u_hat) const;
    /// Exact two-mode spectral representation of the forcing.
    SpectralField forcing(double t, double p) const;

    /// One fixed step of size h (h may be negative). Throws SolverBlowup on non-finite output.
    SpectralField step(const SpectralField& u_hat, double t, double p, double h) const;

    /// Smallest sub-step count (>= base_substeps) keeping the Courant number of u within cfl.
    int substeps_for(const SpectralField& u_hat) const;

private:
    struct Fft;
    // exp(-nu kappa^2 tau) for every stage offset tau of one step size.
    struct DecayTable {
        double nu = 0.0;
        double h = 0.0;
        Eigen::ArrayXd full;
        std::array<Eigen::ArrayXd, 6> from_start;
        std::array<Eigen::ArrayXd, 6> to_end;
        std::array<std::array<Eigen::ArrayXd, 6>, 6> between;
    };
    const DecayTable& decay_table(double nu, double h) const;

    BurgersConfig cfg_;
    Vector kappa_;
    std::vector<bool> keep_;
    double kappa_max_ = 0.0;
    std::unique_ptr<Fft> fft_;
    mutable std::unique_ptr<DecayTable> decay_;
};

struct SimulationOptions {
    std::optional<Vector> u0;
    /// Time at which the transient begins; shifts the forcing phase.
    double t_start = 0.0;
};

/// Integrates through the transient, then records n_snapshots states dt_snapshot apart.
Trajectory simulate_trajectory(double p, int n_snapshots, const BurgersConfig& cfg,
                               const SimulationOptions& options = {});

/// One post-transient trajectory per parameter, in input order. Runs are
/// independent; `jobs` > 1 spreads them over worker threads.
std::vector<Trajectory> generate_training_set(const std::vector<double>& p_values,
                                              int n_snapshots, const BurgersConfig& cfg,
                                              int jobs = 1);

}  // namespace polyrom::pde
