#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polyrom/burgers.hpp"
#include "polyrom/estimators.hpp"
#include "polyrom/metrics.hpp"
#include "polyrom/model_bank.hpp"
#include "polyrom/sensors.hpp"

namespace polyrom::harness {

/// Everything needed to reproduce one study. Serialized as JSON; see
/// config_to_json_text for the full key list.
struct ExperimentConfig {
    pde::BurgersConfig burgers;
    std::vector<double> p_train{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    /// Evaluation parameters outside the training grid.
    std::vector<double> p_test{0.1, 0.3, 0.5, 0.7, 0.9};
    /// Optional training-grid parameters evaluated the same way, for train-vs-test comparisons.
    std::vector<double> p_train_eval;
    int train_snapshots = 2001;
    int estimation_steps = 500;
    int r = 10;
    int sensor_count = 4;
    double noise_std = 0.05;
    double epsilon = 1e-2;
    double p_min = 0.0;
    double p_max = 1.0;
    estimation::EstimatorConfig estimator;
    int n_seeds = 5;
    std::uint64_t root_seed = 20240531;
    std::vector<estimation::EstimatorKind> estimators{estimation::all_estimators()};
    std::filesystem::path output_dir = "polyrom_out";
    /// Load training trajectories from here instead of simulating them.
    std::optional<std::filesystem::path> dataset_dir;
    int jobs = 1;

    /// Throws InvalidInput when a field is out of range.
    void validate() const;
    /// p_test followed by p_train_eval.
    std::vector<double> evaluation_parameters() const;
    pde::SensorModel sensor_model() const;
};

/// Parses a JSON document (strict: unknown keys are rejected) on top of the defaults.
ExperimentConfig config_from_json_text(const std::string& text, const std::string& origin = "config");
std::string config_to_json_text(const ExperimentConfig& cfg);

/// Loads `path` (or the defaults when empty), then applies "dotted.key=value"
/// overrides. Values are parsed as JSON, falling back to a plain string.
ExperimentConfig load_config(const std::optional<std::filesystem::path>& path,
                             const std::vector<std::string>& overrides = {});

/// Seeds of one (p, seed index) cell, fanned out from the root seed.
struct RunSeeds {
    std::uint64_t truth;
    std::uint64_t noise;
};
RunSeeds run_seeds(std::uint64_t root_seed, double p, int seed_index);

/// Reference trajectory and its measurement stream. Column k of `states`
/// is z_{k+1}; column k of `measurements` is y_{k+1}.
struct ReferenceRun {
    double p = 0.0;
    int seed_index = 0;
    double t0 = 0.0;
    double dt = 0.0;
    double phase_offset = 0.0;
    Matrix states;
    Matrix measurements;
};
ReferenceRun make_reference_run(const ExperimentConfig& cfg, double p, int seed_index);

/// One row per estimation step.
struct RunRow {
    int k = 0;
    double t = 0.0;
    double p_hat = 0.0;
    double p_hat_cov = 0.0;
    double state_rel_err = 0.0;
    double proj_floor = 0.0;
};

struct RunResult {
    estimation::EstimatorKind estimator = estimation::EstimatorKind::RobustKf;
    double p = 0.0;
    /// Seed index, or -1 for an externally supplied measurement stream.
    int seed_index = 0;
    bool failed = false;
    std::string error;
    std::vector<RunRow> rows;

    MetricSeries errors() const;
    std::string stem() const;
};

/// Runs one estimator over a reference run; numerical failures are captured
/// in the result instead of propagating.
RunResult run_single(estimation::EstimatorKind kind, const rom::TrainedModel& model,
                     const ExperimentConfig& cfg, const ReferenceRun& ref);

/// Runs one estimator on measurements alone (error columns are NaN).
RunResult run_on_measurements(estimation::EstimatorKind kind, const rom::TrainedModel& model,
                              const ExperimentConfig& cfg, double p_label, double t0, double dt,
                              const Matrix& measurements);

/// Per-step CSV with columns k,t,p_hat,p_hat_cov,state_rel_err,proj_floor.
/// A failed run is written as <stem>.failed holding the error text.
void write_run(const std::filesystem::path& runs_dir, const RunResult& run);
RunResult read_run_csv(const std::filesystem::path& path);

/// Measurement stream CSV: columns k,t,y0..y{m-1}.
void write_measurements_csv(const std::filesystem::path& path, double t0, double dt,
                            const Matrix& measurements);
struct MeasurementStream {
    double t0 = 0.0;
    double dt = 0.0;
    Matrix measurements;
};
MeasurementStream read_measurements_csv(const std::filesystem::path& path);

/// Simulates every (p, seed) reference, runs every configured estimator and
/// writes runs/ and measurements/ under cfg.output_dir.
std::vector<RunResult> run_estimation(const ExperimentConfig& cfg, const rom::TrainedModel& model);

struct SummaryRow {
    std::string estimator;
    double p = 0.0;
    bool in_training = false;
    std::size_t n_runs = 0;
    std::size_t n_failed = 0;
    SeedStatistics rmse;
    SeedStatistics rmse_last_half;
    double proj_floor_mean = 0.0;
    SeedStatistics p_hat_final;
};

struct Evaluation {
    std::vector<SummaryRow> rows;
    /// Expected run stems with neither a CSV nor a .failed marker.
    std::vector<std::string> missing;
    std::vector<std::string> failed;
};

/// Reads runs/ under cfg.output_dir and writes summary.csv plus the
/// fig_error_vs_time.csv, fig_phat_vs_time.csv and fig_train_vs_test.csv
/// figure tables. Every statistic is recomputed from the CSV files.
/// Throws InvalidInput when no run is found.
Evaluation evaluate_runs(const ExperimentConfig& cfg);

/// Training set (simulated or ingested), POD + model bank persisted to
/// output_dir/model, then run_estimation and evaluate_runs. report.json
/// records the configuration, seeds, failures and timings.
struct ExperimentReport {
    rom::TrainedModel model;
    std::vector<RunResult> runs;
    Evaluation evaluation;
};
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Training step shared by run_experiment and the command-line tool.
std::vector<Trajectory> training_trajectories(const ExperimentConfig& cfg);
rom::TrainedModel train_from_config(const ExperimentConfig& cfg,
                                    const std::vector<Trajectory>& trajectories);

/// Shortest round-trip decimal form, as used in run file names.
std::string format_parameter(double p);

/// Wall-clock seconds per named stage, in execution order.
using StageTimings = std::vector<std::pair<std::string, double>>;

/// Writes report.json: tool version, command, configuration, root and per-run
/// seeds, failures, model summary and timings. Null pointers omit a section.
void write_report(const std::filesystem::path& path, const ExperimentConfig& cfg,
                  const std::string& command, const rom::TrainedModel* model,
                  const std::vector<RunResult>* runs, const Evaluation* evaluation,
                  const StageTimings& timings, const std::string& error = {});

}  // namespace polyrom::harness
