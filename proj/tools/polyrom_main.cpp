// polyrom: simulate, train, estimate and evaluate from the command line.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "polyrom/dataset_io.hpp"
#include "polyrom/errors.hpp"
#include "polyrom/experiment.hpp"
#include "polyrom/model_io.hpp"

namespace fs = std::filesystem;
using namespace polyrom;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitWarning = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;

struct Options {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool defaults = false;
    std::optional<int> jobs;
    bool quiet = false;

    std::string dataset;
    std::string model;
    std::string measurements;
    std::vector<double> p_values;
};

class Clock {
public:
    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

harness::ExperimentConfig resolve_config(const Options& opt) {
    if (opt.config_path.empty() && !opt.defaults) {
        throw InvalidInput("a --config file is required (or pass --defaults)");
    }
    std::optional<fs::path> path;
    if (!opt.config_path.empty()) {
        if (!fs::exists(opt.config_path)) throw InvalidInput("config file " + opt.config_path + " does not exist");
        path = opt.config_path;
    }
    std::vector<std::string> overrides = opt.overrides;
    if (opt.seed) overrides.push_back("root_seed=" + std::to_string(*opt.seed));
    if (opt.jobs) overrides.push_back("jobs=" + std::to_string(*opt.jobs));
    auto cfg = harness::load_config(path, overrides);
    if (!opt.out.empty()) cfg.output_dir = opt.out;
    return cfg;
}

fs::path dataset_dir(const Options& opt, const harness::ExperimentConfig& cfg) {
    if (!opt.dataset.empty()) return opt.dataset;
    if (cfg.dataset_dir) return *cfg.dataset_dir;
    return cfg.output_dir / "dataset";
}

fs::path model_dir(const Options& opt, const harness::ExperimentConfig& cfg) {
    return opt.model.empty() ? cfg.output_dir / "model" : fs::path(opt.model);
}

void simulate(const Options& opt, const harness::ExperimentConfig& cfg) {
    const auto trajectories =
        pde::generate_training_set(cfg.p_train, cfg.train_snapshots, cfg.burgers, cfg.jobs);
    io::DatasetMetadata meta;
    meta.solver = cfg.burgers;
    const fs::path dir = dataset_dir(opt, cfg);
    io::write_dataset(dir, trajectories, meta);
    if (opt.quiet) return;
    const auto& first = trajectories.front();
    std::printf("dataset %s: n=%ld m=%ld q=%zu dt=%g\n", dir.c_str(), static_cast<long>(first.state_dim()),
                static_cast<long>(first.pair_count()), trajectories.size(), first.dt);
    std::printf("%8s %12s %12s %9s\n", "p", "mean |z|^2", "max |z|", "substeps");
    for (const auto& t : trajectories) {
        const double energy = t.snapshots.colwise().squaredNorm().mean();
        std::printf("%8g %12.6g %12.6g %9d\n", t.p, energy, t.snapshots.cwiseAbs().maxCoeff(), t.substeps);
    }
}

double relative_residual(const Matrix& A, const Trajectory& t, const rom::PodBasis& basis) {
    const Matrix next = basis.U.transpose() * t.snapshots.rightCols(t.pair_count());
    return rom::one_step_residual(A, t, basis) / next.norm();
}

rom::TrainedModel train(const Options& opt, const harness::ExperimentConfig& cfg) {
    const fs::path dir = dataset_dir(opt, cfg);
    const auto data = io::ingest_external_dataset(dir);
    rom::BankOptions bank_options;
    bank_options.epsilon = cfg.epsilon;
    bank_options.p_min = cfg.p_min;
    bank_options.p_max = cfg.p_max;
    bank_options.jobs = cfg.jobs;
    auto model = rom::train_model(data.trajectories, cfg.r, bank_options);
    const fs::path out = model_dir(opt, cfg);
    io::save_model(out, model);
    if (opt.quiet) return model;

    const auto& basis = model.basis;
    std::printf("model %s: r=%ld q=%zu retained energy %.8f\n", out.c_str(), static_cast<long>(basis.rank()),
                model.bank.size(), basis.retained_energy());
    const double total = basis.spectrum.squaredNorm();
    double cumulative = 0.0;
    std::printf("%4s %14s %12s\n", "mode", "sigma", "cum. energy");
    for (Eigen::Index i = 0; i < basis.rank(); ++i) {
        cumulative += basis.sigma(i) * basis.sigma(i);
        std::printf("%4ld %14.6g %12.8f\n", static_cast<long>(i + 1), basis.sigma(i), cumulative / total);
    }
    std::printf("%8s %14s %14s %10s\n", "p", "local resid", "robust resid", "data rank");
    for (std::size_t i = 0; i < data.trajectories.size(); ++i) {
        const auto& t = data.trajectories[i];
        std::printf("%8g %14.6g %14.6g %10ld%s\n", t.p, relative_residual(model.bank.A_local[i], t, basis),
                    relative_residual(model.bank.A_robust, t, basis),
                    static_cast<long>(model.local_fits[i].data_rank),
                    model.local_fits[i].rank_deficient ? " (rank deficient)" : "");
    }
    if (model.bank.size() == 1) {
        const double gap = (model.bank.A_robust - model.bank.A_local[0]).norm() /
                           std::max(model.bank.A_local[0].norm(), 1e-300);
        std::printf("single trajectory: robust vs local relative difference %.3g (%s)\n", gap,
                    gap < 1e-8 ? "consistent" : "INCONSISTENT");
    }
    return model;
}

std::vector<harness::RunResult> estimate(const Options& opt, harness::ExperimentConfig cfg,
                                         const rom::TrainedModel& model) {
    std::vector<harness::RunResult> runs;
    if (!opt.measurements.empty()) {
        if (opt.p_values.size() != 1) {
            throw InvalidInput("--measurements needs exactly one --p value to label the runs");
        }
        const auto stream = harness::read_measurements_csv(opt.measurements);
        const fs::path runs_dir = cfg.output_dir / "runs";
        for (auto kind : cfg.estimators) {
            runs.push_back(harness::run_on_measurements(kind, model, cfg, opt.p_values.front(),
                                                        stream.t0, stream.dt, stream.measurements));
            harness::write_run(runs_dir, runs.back());
        }
    } else {
        if (!opt.p_values.empty()) {
            cfg.p_test = opt.p_values;
            cfg.p_train_eval.clear();
            cfg.validate();
        }
        runs = harness::run_estimation(cfg, model);
    }
    if (!opt.quiet) {
        for (const auto& run : runs) {
            if (run.failed) {
                std::printf("%-28s FAILED: %s\n", run.stem().c_str(), run.error.c_str());
            } else if (run.seed_index >= 0) {
                std::printf("%-28s rmse %.5f  last half %.5f  p_hat %.4f\n", run.stem().c_str(),
                            run.errors().time_average(), run.errors().last_half_average(),
                            run.rows.back().p_hat);
            } else {
                std::printf("%-28s p_hat %.4f\n", run.stem().c_str(), run.rows.back().p_hat);
            }
        }
    }
    return runs;
}

harness::Evaluation evaluate(const Options& opt, const harness::ExperimentConfig& cfg) {
    auto eval = harness::evaluate_runs(cfg);
    if (!opt.quiet) {
        std::printf("%-10s %5s %5s %4s %12s %12s %12s %10s\n", "estimator", "p", "train", "runs", "rmse mean",
                    "rmse std", "last half", "p_hat");
        for (const auto& row : eval.rows) {
            std::printf("%-10s %5g %5s %4zu %12.6f %12.6f %12.6f %10.4f\n", row.estimator.c_str(), row.p,
                        row.in_training ? "yes" : "no", row.n_runs, row.rmse.mean, row.rmse.std,
                        row.rmse_last_half.mean, row.p_hat_final.mean);
        }
    }
    for (const auto& name : eval.missing) std::fprintf(stderr, "warning: missing run %s\n", name.c_str());
    for (const auto& name : eval.failed) std::fprintf(stderr, "warning: failed run %s\n", name.c_str());
    return eval;
}

int exit_code_for(const std::vector<harness::RunResult>& runs) {
    for (const auto& run : runs) {
        if (run.failed) return kExitNumerical;
    }
    return kExitOk;
}

int exit_code_for(const harness::Evaluation& eval) {
    if (!eval.failed.empty()) return kExitNumerical;
    return eval.missing.empty() ? kExitOk : kExitWarning;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Polytopic reduced-order models with adaptive Kalman estimation"};
    app.require_subcommand(1);
    Options opt;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "JSON experiment configuration");
        sub->add_option("--set", opt.overrides, "Override a config key, e.g. --set burgers.grid_size=128")
            ->allow_extra_args(false)
            ->take_all();
        sub->add_option("--seed", opt.seed, "Root seed");
        sub->add_option("--out", opt.out, "Output directory");
        sub->add_flag("--defaults", opt.defaults, "Use built-in defaults when no --config is given");
        sub->add_option("--jobs", opt.jobs, "Worker threads")->check(CLI::PositiveNumber);
        sub->add_flag("-q,--quiet", opt.quiet, "Suppress tables");
    };

    auto* sim = app.add_subcommand("simulate", "Generate the Burgers training dataset");
    add_common(sim);
    sim->add_option("--dataset", opt.dataset, "Dataset directory (default <out>/dataset)");

    auto* trn = app.add_subcommand("train", "Build the POD basis and model bank");
    add_common(trn);
    trn->add_option("--dataset", opt.dataset, "Dataset directory (default <out>/dataset)");
    trn->add_option("--model", opt.model, "Model directory (default <out>/model)");

    auto* est = app.add_subcommand("estimate", "Run estimators on simulated or recorded measurements");
    add_common(est);
    est->add_option("--model", opt.model, "Model directory (default <out>/model)");
    est->add_option("--p", opt.p_values, "Parameter values (default: the configured evaluation grid)");
    est->add_option("--measurements", opt.measurements, "Measurement CSV (k,t,y0,...); skips simulation");

    auto* evl = app.add_subcommand("evaluate", "Summarize run CSVs into summary and figure tables");
    add_common(evl);

    auto* full = app.add_subcommand("full", "simulate, train, estimate and evaluate in sequence");
    add_common(full);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    harness::ExperimentConfig cfg;
    harness::StageTimings timings;
    Clock clock;
    std::optional<rom::TrainedModel> model;
    std::vector<harness::RunResult> runs;
    std::optional<harness::Evaluation> eval;
    int code = kExitOk;
    bool have_config = false;

    const auto report = [&](const std::string& error) {
        if (!have_config) return;
        try {
            harness::write_report(cfg.output_dir / "report.json", cfg, command, model ? &*model : nullptr,
                                  runs.empty() ? nullptr : &runs, eval ? &*eval : nullptr, timings, error);
        } catch (const std::exception& e) {
            std::fprintf(stderr, "warning: could not write report.json: %s\n", e.what());
        }
    };

    try {
        cfg = resolve_config(opt);
        have_config = true;
        fs::create_directories(cfg.output_dir);

        if (command == "simulate" || command == "full") {
            simulate(opt, cfg);
            timings.emplace_back("simulate", clock.lap());
        }
        if (command == "train" || command == "full") {
            model = train(opt, cfg);
            timings.emplace_back("train", clock.lap());
        }
        if (command == "estimate" || command == "full") {
            if (!model) model = io::load_model(model_dir(opt, cfg));
            runs = estimate(opt, cfg, *model);
            code = exit_code_for(runs);
            timings.emplace_back("estimate", clock.lap());
        }
        if (command == "evaluate" || command == "full") {
            eval = evaluate(opt, cfg);
            code = std::max(code, exit_code_for(*eval));
            timings.emplace_back("evaluate", clock.lap());
        }
        report({});
        return code;
    } catch (const InvalidInput& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        report(e.what());
        return kExitInvalid;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        report(e.what());
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        report(e.what());
        return kExitInvalid;
    }
}
