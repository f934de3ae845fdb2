#include "polyrom/experiment.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "json_codec.hpp"
#include "polyrom/dataset_io.hpp"
#include "polyrom/errors.hpp"
#include "polyrom/model_io.hpp"
#include "polyrom/parallel.hpp"
#include "polyrom/rng.hpp"

#ifndef POLYROM_VERSION
#define POLYROM_VERSION "unknown"
#endif

namespace polyrom::harness {

namespace fs = std::filesystem;
using codec::json;
using estimation::EstimatorKind;

namespace {

constexpr std::uint64_t kTruthStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
constexpr const char* kRunHeader = "k,t,p_hat,p_hat_cov,state_rel_err,proj_floor";

std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, const std::string& where) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) {
        throw InvalidInput(where + ": cannot parse '" + std::string(text) + "' as a number");
    }
    return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

void check_parameters(const std::vector<double>& ps, double lo, double hi, const char* name,
                      bool increasing) {
    for (std::size_t i = 0; i < ps.size(); ++i) {
        if (!(ps[i] >= lo && ps[i] <= hi)) {
            throw InvalidInput(std::string(name) + " value " + fmt(ps[i]) + " lies outside [" +
                               fmt(lo) + ", " + fmt(hi) + "]");
        }
        if (increasing && i > 0 && !(ps[i] > ps[i - 1])) {
            throw InvalidInput(std::string(name) + " must be strictly increasing");
        }
    }
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void read_optional(codec::Reader& r, const char* key, std::optional<double>& out) {
    if (const json* v = r.child(key)) {
        if (v->is_null()) {
            out.reset();
        } else if (v->is_number()) {
            out = v->get<double>();
        } else {
            throw InvalidInput(r.label(key) + " must be a number or null");
        }
    }
}

json config_to_json(const ExperimentConfig& c) {
    json estimators = json::array();
    for (auto kind : c.estimators) estimators.push_back(std::string(estimation::estimator_name(kind)));
    const auto& e = c.estimator;
    return json{
        {"burgers", codec::to_json(c.burgers)},
        {"p_train", c.p_train},
        {"p_test", c.p_test},
        {"p_train_eval", c.p_train_eval},
        {"train_snapshots", c.train_snapshots},
        {"estimation_steps", c.estimation_steps},
        {"r", c.r},
        {"sensor_count", c.sensor_count},
        {"noise_std", c.noise_std},
        {"epsilon", c.epsilon},
        {"p_min", c.p_min},
        {"p_max", c.p_max},
        {"noise", codec::to_json(e.noise)},
        {"ukf", codec::to_json(e.ukf)},
        {"estimator",
         {{"initial_state_var", e.initial_state_var},
          {"initial_param_var", optional_number(e.initial_param_var)},
          {"initial_param", optional_number(e.initial_param)},
          {"param_var_collapse", e.param_var_collapse},
          {"project_parameter", e.project_parameter},
          {"param_innovation_inflation", e.param_innovation_inflation}}},
        {"n_seeds", c.n_seeds},
        {"root_seed", c.root_seed},
        {"estimators", estimators},
        {"output_dir", c.output_dir.string()},
        {"dataset_dir", c.dataset_dir ? json(c.dataset_dir->string()) : json(nullptr)},
        {"jobs", c.jobs}};
}

ExperimentConfig config_from_json(const json& doc, const std::string& origin) {
    ExperimentConfig c;
    codec::Reader r(doc, origin);
    if (const json* b = r.child("burgers")) codec::from_json(*b, c.burgers, r.label("burgers"));
    r.get("p_train", c.p_train);
    r.get("p_test", c.p_test);
    r.get("p_train_eval", c.p_train_eval);
    r.get("train_snapshots", c.train_snapshots);
    r.get("estimation_steps", c.estimation_steps);
    r.get("r", c.r);
    r.get("sensor_count", c.sensor_count);
    r.get("noise_std", c.noise_std);
    r.get("epsilon", c.epsilon);
    r.get("p_min", c.p_min);
    r.get("p_max", c.p_max);
    if (const json* n = r.child("noise")) codec::from_json(*n, c.estimator.noise, r.label("noise"));
    if (const json* u = r.child("ukf")) codec::from_json(*u, c.estimator.ukf, r.label("ukf"));
    if (const json* e = r.child("estimator")) {
        codec::Reader er(*e, r.label("estimator"));
        auto& ec = c.estimator;
        er.get("initial_state_var", ec.initial_state_var);
        read_optional(er, "initial_param_var", ec.initial_param_var);
        read_optional(er, "initial_param", ec.initial_param);
        er.get("param_var_collapse", ec.param_var_collapse);
        er.get("project_parameter", ec.project_parameter);
        er.get("param_innovation_inflation", ec.param_innovation_inflation);
        er.finish();
    }
    r.get("n_seeds", c.n_seeds);
    r.get("root_seed", c.root_seed);
    std::vector<std::string> names;
    if (doc.contains("estimators")) {
        r.get("estimators", names);
        c.estimators.clear();
        for (const auto& name : names) c.estimators.push_back(estimation::parse_estimator(name));
    } else {
        r.child("estimators");
    }
    std::string out_dir = c.output_dir.string();
    r.get("output_dir", out_dir);
    c.output_dir = out_dir;
    if (const json* d = r.child("dataset_dir")) {
        if (d->is_null()) {
            c.dataset_dir.reset();
        } else if (d->is_string()) {
            c.dataset_dir = fs::path(d->get<std::string>());
        } else {
            throw InvalidInput(r.label("dataset_dir") + " must be a string or null");
        }
    }
    r.get("jobs", c.jobs);
    r.finish();
    c.validate();
    return c;
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw InvalidInput("override '" + assignment + "' must have the form key=value");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
        if (part.empty()) throw InvalidInput("override key '" + key + "' has an empty component");
        if (!node->is_object()) throw InvalidInput("override key '" + key + "' descends into a non-object");
        if (dot == std::string::npos) {
            (*node)[part] = std::move(value);
            return;
        }
        node = &(*node)[part];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

std::vector<RunRow> read_rows(std::istream& in, const std::string& where) {
    std::string line;
    if (!std::getline(in, line) || line != kRunHeader) {
        throw InvalidInput(where + ": expected header '" + std::string(kRunHeader) + "'");
    }
    std::vector<RunRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        const std::string at = where + ":" + std::to_string(lineno);
        if (fields.size() != 6) throw InvalidInput(at + ": expected 6 columns");
        RunRow row;
        row.k = static_cast<int>(parse_double(fields[0], at));
        row.t = parse_double(fields[1], at);
        row.p_hat = parse_double(fields[2], at);
        row.p_hat_cov = parse_double(fields[3], at);
        row.state_rel_err = parse_double(fields[4], at);
        row.proj_floor = parse_double(fields[5], at);
        rows.push_back(row);
    }
    return rows;
}

std::string run_stem(EstimatorKind kind, double p, int seed_index) {
    return std::string(estimation::estimator_name(kind)) + "_" + format_parameter(p) + "_" +
           (seed_index < 0 ? std::string("ext") : std::to_string(seed_index));
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw InvalidInput("failed writing " + path.string());
}

}  // namespace

// Configuration

void ExperimentConfig::validate() const {
    burgers.validate();
    if (!(p_min < p_max)) throw InvalidInput("p_min must be below p_max");
    if (p_train.empty()) throw InvalidInput("p_train must not be empty");
    check_parameters(p_train, p_min, p_max, "p_train", true);
    check_parameters(p_test, p_min, p_max, "p_test", false);
    check_parameters(p_train_eval, p_min, p_max, "p_train_eval", false);
    if (train_snapshots < 2) throw InvalidInput("train_snapshots must be at least 2");
    if (estimation_steps < 1) throw InvalidInput("estimation_steps must be at least 1");
    if (r < 1) throw InvalidInput("r must be at least 1");
    if (sensor_count < 1 || sensor_count > burgers.grid_size) {
        throw InvalidInput("sensor_count must lie in [1, grid_size]");
    }
    if (!(noise_std >= 0.0)) throw InvalidInput("noise_std must be non-negative");
    if (!(epsilon > 0.0)) throw InvalidInput("epsilon must be positive");
    if (n_seeds < 1) throw InvalidInput("n_seeds must be at least 1");
    if (estimators.empty()) throw InvalidInput("at least one estimator must be selected");
    std::set<EstimatorKind> unique(estimators.begin(), estimators.end());
    if (unique.size() != estimators.size()) throw InvalidInput("estimators must not repeat");
    if (jobs < 1) throw InvalidInput("jobs must be at least 1");
    estimator.noise.validate();
    estimator.ukf.validate(r + 1);
    if (!(estimator.initial_state_var > 0.0)) throw InvalidInput("initial_state_var must be positive");
    if (estimator.initial_param_var && !(*estimator.initial_param_var > 0.0)) {
        throw InvalidInput("initial_param_var must be positive");
    }
    if (!(estimator.param_innovation_inflation >= 1.0)) {
        throw InvalidInput("param_innovation_inflation must be at least 1");
    }
}

std::vector<double> ExperimentConfig::evaluation_parameters() const {
    std::vector<double> out = p_test;
    out.insert(out.end(), p_train_eval.begin(), p_train_eval.end());
    return out;
}

pde::SensorModel ExperimentConfig::sensor_model() const {
    return pde::SensorModel::equally_spaced(burgers.grid_size, sensor_count, noise_std, root_seed);
}

ExperimentConfig config_from_json_text(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidInput(origin + ": " + e.what());
    }
    return config_from_json(doc, origin);
}

std::string config_to_json_text(const ExperimentConfig& cfg) { return config_to_json(cfg).dump(2); }

ExperimentConfig load_config(const std::optional<fs::path>& path,
                             const std::vector<std::string>& overrides) {
    json doc = path ? codec::read_json_file(*path) : json::object();
    for (const auto& o : overrides) apply_override(doc, o);
    return config_from_json(doc, path ? path->string() : std::string("config"));
}

// Reference runs

std::string format_parameter(double p) { return fmt(p); }

RunSeeds run_seeds(std::uint64_t root_seed, double p, int seed_index) {
    const auto p_bits = std::bit_cast<std::uint64_t>(p);
    const auto s = static_cast<std::uint64_t>(seed_index);
    return {derive_seed(root_seed, {kTruthStream, p_bits, s}),
            derive_seed(root_seed, {kNoiseStream, p_bits, s})};
}

ReferenceRun make_reference_run(const ExperimentConfig& cfg, double p, int seed_index) {
    const RunSeeds seeds = run_seeds(cfg.root_seed, p, seed_index);
    CounterRng truth_rng(seeds.truth);
    ReferenceRun ref;
    ref.p = p;
    ref.seed_index = seed_index;
    // A random start phase within one forcing period yields a distinct
    // initial condition that settles onto the same attractor.
    ref.phase_offset = truth_rng.uniform() * 2.0 * std::numbers::pi / cfg.burgers.frequency(p);
    pde::SimulationOptions options;
    options.t_start = ref.phase_offset;
    const Trajectory traj = pde::simulate_trajectory(p, cfg.estimation_steps + 1, cfg.burgers, options);
    ref.t0 = traj.t0;
    ref.dt = traj.dt;
    ref.states = traj.snapshots.rightCols(cfg.estimation_steps);

    pde::SensorModel sensors = cfg.sensor_model();
    sensors.seed = seeds.noise;
    CounterRng noise_rng(seeds.noise);
    ref.measurements = pde::measure_all(ref.states, sensors, noise_rng);
    return ref;
}

MetricSeries RunResult::errors() const {
    MetricSeries s;
    s.values.reserve(rows.size());
    for (const auto& row : rows) s.values.push_back(row.state_rel_err);
    return s;
}

std::string RunResult::stem() const { return run_stem(estimator, p, seed_index); }

namespace {

RunResult run_stream(EstimatorKind kind, const rom::TrainedModel& model, const ExperimentConfig& cfg,
                     double p, int seed_index, double t0, double dt, const Matrix& measurements,
                     const Matrix* states) {
    RunResult result;
    result.estimator = kind;
    result.p = p;
    result.seed_index = seed_index;
    const auto H = estimation::ObservationOperator::from_sensors(model.basis, cfg.sensor_model());
    if (measurements.rows() != H.measurement_dim()) {
        throw InvalidInput("measurement stream has " + std::to_string(measurements.rows()) +
                           " rows but the configuration has " +
                           std::to_string(H.measurement_dim()) + " sensors");
    }
    try {
        auto estimator = estimation::make_estimator(kind, model.bank, model.basis, H, cfg.estimator);
        const double nan = std::nan("");
        result.rows.reserve(static_cast<std::size_t>(measurements.cols()));
        for (Eigen::Index k = 0; k < measurements.cols(); ++k) {
            const auto est = estimator->step(measurements.col(k));
            if (!est.x_hat.allFinite() || !est.cov.allFinite()) {
                throw NumericalError("non-finite estimate at step " + std::to_string(k + 1));
            }
            RunRow row;
            row.k = static_cast<int>(k + 1);
            row.t = t0 + static_cast<double>(k + 1) * dt;
            row.p_hat = est.p_hat;
            row.p_hat_cov = est.p_hat_var;
            if (states) {
                const Vector z = states->col(k);
                row.state_rel_err = relative_error(est.z_hat, z);
                row.proj_floor = projection_floor(z, model.basis);
            } else {
                row.state_rel_err = row.proj_floor = nan;
            }
            result.rows.push_back(row);
        }
    } catch (const NumericalError& e) {
        result.failed = true;
        result.error = e.what();
        result.rows.clear();
    }
    return result;
}

}  // namespace

RunResult run_single(EstimatorKind kind, const rom::TrainedModel& model, const ExperimentConfig& cfg,
                     const ReferenceRun& ref) {
    return run_stream(kind, model, cfg, ref.p, ref.seed_index, ref.t0, ref.dt, ref.measurements,
                      &ref.states);
}

RunResult run_on_measurements(EstimatorKind kind, const rom::TrainedModel& model,
                              const ExperimentConfig& cfg, double p_label, double t0, double dt,
                              const Matrix& measurements) {
    return run_stream(kind, model, cfg, p_label, -1, t0, dt, measurements, nullptr);
}

// Files

void write_run(const fs::path& runs_dir, const RunResult& run) {
    fs::create_directories(runs_dir);
    const fs::path csv = runs_dir / (run.stem() + ".csv");
    const fs::path marker = runs_dir / (run.stem() + ".failed");
    if (run.failed) {
        fs::remove(csv);
        write_text(marker, run.error + "\n");
        return;
    }
    fs::remove(marker);
    std::string text = std::string(kRunHeader) + "\n";
    for (const auto& row : run.rows) {
        text += std::to_string(row.k) + "," + fmt(row.t) + "," + fmt(row.p_hat) + "," +
                fmt(row.p_hat_cov) + "," + fmt(row.state_rel_err) + "," + fmt(row.proj_floor) + "\n";
    }
    write_text(csv, text);
}

RunResult read_run_csv(const fs::path& path) {
    const std::string stem = path.stem().string();
    const auto parts = split(stem, '_');
    if (parts.size() != 3) {
        throw InvalidInput(path.string() + ": file name must be <estimator>_<p>_<seed>.csv");
    }
    RunResult run;
    run.estimator = estimation::parse_estimator(parts[0]);
    run.p = parse_double(parts[1], path.string());
    run.seed_index = parts[2] == "ext" ? -1 : static_cast<int>(parse_double(parts[2], path.string()));
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path.string());
    run.rows = read_rows(in, path.string());
    return run;
}

void write_measurements_csv(const fs::path& path, double t0, double dt, const Matrix& measurements) {
    std::string text = "k,t";
    for (Eigen::Index j = 0; j < measurements.rows(); ++j) text += ",y" + std::to_string(j);
    text += "\n";
    for (Eigen::Index k = 0; k < measurements.cols(); ++k) {
        text += std::to_string(k + 1) + "," + fmt(t0 + static_cast<double>(k + 1) * dt);
        for (Eigen::Index j = 0; j < measurements.rows(); ++j) text += "," + fmt(measurements(j, k));
        text += "\n";
    }
    write_text(path, text);
}

MeasurementStream read_measurements_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput(path.string() + ": empty file");
    const auto header = split(line, ',');
    if (header.size() < 3 || header[0] != "k" || header[1] != "t") {
        throw InvalidInput(path.string() + ": header must be k,t,y0,...");
    }
    const std::size_t m = header.size() - 2;
    std::vector<double> times;
    std::vector<std::vector<double>> columns;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        const std::string at = path.string() + ":" + std::to_string(lineno);
        if (fields.size() != m + 2) throw InvalidInput(at + ": expected " + std::to_string(m + 2) + " columns");
        times.push_back(parse_double(fields[1], at));
        std::vector<double> y(m);
        for (std::size_t j = 0; j < m; ++j) {
            y[j] = parse_double(fields[j + 2], at);
            if (!std::isfinite(y[j])) throw InvalidInput(at + ": non-finite measurement");
        }
        columns.push_back(std::move(y));
    }
    if (columns.empty()) throw InvalidInput(path.string() + ": no measurement rows");
    MeasurementStream stream;
    stream.measurements.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t k = 0; k < columns.size(); ++k) {
        for (std::size_t j = 0; j < m; ++j) {
            stream.measurements(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = columns[k][j];
        }
    }
    stream.dt = times.size() > 1 ? times[1] - times[0] : 0.0;
    stream.t0 = times.front() - stream.dt;
    return stream;
}

// Pipeline

std::vector<RunResult> run_estimation(const ExperimentConfig& cfg, const rom::TrainedModel& model) {
    cfg.validate();
    const std::vector<double> ps = cfg.evaluation_parameters();
    const std::size_t cells = ps.size() * static_cast<std::size_t>(cfg.n_seeds);
    std::vector<std::vector<RunResult>> results(cells);
    std::vector<ReferenceRun> refs(cells);

    parallel_for(cells, cfg.jobs, [&](std::size_t cell) {
        const double p = ps[cell / static_cast<std::size_t>(cfg.n_seeds)];
        const int seed = static_cast<int>(cell % static_cast<std::size_t>(cfg.n_seeds));
        auto& out = results[cell];
        try {
            refs[cell] = make_reference_run(cfg, p, seed);
        } catch (const NumericalError& e) {
            for (auto kind : cfg.estimators) {
                RunResult failed;
                failed.estimator = kind;
                failed.p = p;
                failed.seed_index = seed;
                failed.failed = true;
                failed.error = std::string("reference simulation failed: ") + e.what();
                out.push_back(std::move(failed));
            }
            return;
        }
        for (auto kind : cfg.estimators) out.push_back(run_single(kind, model, cfg, refs[cell]));
    });

    const fs::path runs_dir = cfg.output_dir / "runs";
    const fs::path meas_dir = cfg.output_dir / "measurements";
    fs::create_directories(runs_dir);
    fs::create_directories(meas_dir);
    std::vector<RunResult> all;
    for (std::size_t cell = 0; cell < cells; ++cell) {
        const auto& ref = refs[cell];
        if (ref.measurements.size() > 0) {
            write_measurements_csv(meas_dir / (format_parameter(ref.p) + "_" +
                                               std::to_string(ref.seed_index) + ".csv"),
                                   ref.t0, ref.dt, ref.measurements);
        }
        for (auto& run : results[cell]) {
            write_run(runs_dir, run);
            all.push_back(std::move(run));
        }
    }
    return all;
}

Evaluation evaluate_runs(const ExperimentConfig& cfg) {
    const fs::path runs_dir = cfg.output_dir / "runs";
    const std::vector<double> ps = cfg.evaluation_parameters();
    const std::set<double> training(cfg.p_train.begin(), cfg.p_train.end());

    Evaluation eval;
    std::size_t found = 0;
    std::string summary =
        "estimator,p,in_training,n_runs,n_failed,rmse_mean,rmse_std,rmse_last_half_mean,"
        "rmse_last_half_std,proj_floor_mean,p_hat_final_mean,p_hat_final_std\n";
    std::string fig_err = "estimator,p,k,t,rmse_mean,rmse_std,proj_floor_mean\n";
    std::string fig_phat = "estimator,p,k,t,p_hat_mean,p_hat_std\n";
    std::string fig_bars = "estimator,p,in_training,rmse_mean,rmse_std\n";

    for (auto kind : cfg.estimators) {
        for (double p : ps) {
            std::vector<RunResult> runs;
            SummaryRow row;
            row.estimator = std::string(estimation::estimator_name(kind));
            row.p = p;
            row.in_training = training.count(p) > 0;
            for (int s = 0; s < cfg.n_seeds; ++s) {
                const std::string stem = run_stem(kind, p, s);
                const fs::path csv = runs_dir / (stem + ".csv");
                if (fs::exists(csv)) {
                    runs.push_back(read_run_csv(csv));
                } else if (fs::exists(runs_dir / (stem + ".failed"))) {
                    eval.failed.push_back(stem);
                    ++row.n_failed;
                } else {
                    eval.missing.push_back(stem);
                }
            }
            found += runs.size() + row.n_failed;
            if (runs.empty()) continue;

            std::vector<double> averages, last_half, finals;
            double floor_sum = 0.0;
            for (const auto& run : runs) {
                const MetricSeries series = run.errors();
                averages.push_back(series.time_average());
                last_half.push_back(series.last_half_average());
                finals.push_back(run.rows.empty() ? std::nan("") : run.rows.back().p_hat);
                MetricSeries floors;
                for (const auto& r : run.rows) floors.values.push_back(r.proj_floor);
                floor_sum += floors.time_average();
            }
            row.n_runs = runs.size();
            row.rmse = across_seeds(averages);
            row.rmse_last_half = across_seeds(last_half);
            row.proj_floor_mean = floor_sum / static_cast<double>(runs.size());
            row.p_hat_final = across_seeds(finals);

            summary += row.estimator + "," + fmt(p) + "," + (row.in_training ? "1" : "0") + "," +
                       std::to_string(row.n_runs) + "," + std::to_string(row.n_failed) + "," +
                       fmt(row.rmse.mean) + "," + fmt(row.rmse.std) + "," +
                       fmt(row.rmse_last_half.mean) + "," + fmt(row.rmse_last_half.std) + "," +
                       fmt(row.proj_floor_mean) + "," + fmt(row.p_hat_final.mean) + "," +
                       fmt(row.p_hat_final.std) + "\n";
            fig_bars += row.estimator + "," + fmt(p) + "," + (row.in_training ? "1" : "0") + "," +
                        fmt(row.rmse.mean) + "," + fmt(row.rmse.std) + "\n";

            const std::size_t steps = runs.front().rows.size();
            const bool adaptive = kind != EstimatorKind::RobustKf;
            for (std::size_t k = 0; k < steps; ++k) {
                std::vector<double> errs, floors, phats;
                for (const auto& run : runs) {
                    if (k >= run.rows.size()) continue;
                    errs.push_back(run.rows[k].state_rel_err);
                    floors.push_back(run.rows[k].proj_floor);
                    phats.push_back(run.rows[k].p_hat);
                }
                const auto& ref_row = runs.front().rows[k];
                const std::string prefix = row.estimator + "," + fmt(p) + "," +
                                           std::to_string(ref_row.k) + "," + fmt(ref_row.t) + ",";
                const auto e = across_seeds(errs);
                fig_err += prefix + fmt(e.mean) + "," + fmt(e.std) + "," +
                           fmt(across_seeds(floors).mean) + "\n";
                if (adaptive) {
                    const auto ph = across_seeds(phats);
                    fig_phat += prefix + fmt(ph.mean) + "," + fmt(ph.std) + "\n";
                }
            }
            eval.rows.push_back(std::move(row));
        }
    }
    if (found == 0) throw InvalidInput("no runs found in " + runs_dir.string());

    write_text(cfg.output_dir / "summary.csv", summary);
    write_text(cfg.output_dir / "fig_error_vs_time.csv", fig_err);
    write_text(cfg.output_dir / "fig_phat_vs_time.csv", fig_phat);
    write_text(cfg.output_dir / "fig_train_vs_test.csv", fig_bars);
    return eval;
}

std::vector<Trajectory> training_trajectories(const ExperimentConfig& cfg) {
    cfg.validate();
    if (!cfg.dataset_dir) {
        return pde::generate_training_set(cfg.p_train, cfg.train_snapshots, cfg.burgers, cfg.jobs);
    }
    auto data = io::ingest_external_dataset(*cfg.dataset_dir);
    std::vector<double> ps;
    for (const auto& t : data.trajectories) ps.push_back(t.p);
    if (ps != cfg.p_train) {
        throw InvalidInput("dataset " + cfg.dataset_dir->string() +
                           " parameters do not match p_train in the configuration");
    }
    return std::move(data.trajectories);
}

rom::TrainedModel train_from_config(const ExperimentConfig& cfg,
                                    const std::vector<Trajectory>& trajectories) {
    rom::BankOptions options;
    options.epsilon = cfg.epsilon;
    options.p_min = cfg.p_min;
    options.p_max = cfg.p_max;
    options.jobs = cfg.jobs;
    return rom::train_model(trajectories, cfg.r, options);
}

void write_report(const fs::path& path, const ExperimentConfig& cfg, const std::string& command,
                  const rom::TrainedModel* model, const std::vector<RunResult>* runs,
                  const Evaluation* evaluation, const StageTimings& timings,
                  const std::string& error) {
    json doc{{"tool", "polyrom"},
             {"version", POLYROM_VERSION},
             {"command", command},
             {"config", config_to_json(cfg)},
             {"root_seed", cfg.root_seed}};
    if (model) {
        json ranks = json::array();
        for (const auto& fit : model->local_fits) ranks.push_back(fit.data_rank);
        doc["model"] = {{"r", model->basis.rank()},
                        {"n", model->basis.state_dim()},
                        {"q", model->bank.size()},
                        {"retained_energy", model->basis.retained_energy()},
                        {"sigma", std::vector<double>(model->basis.sigma.data(),
                                                      model->basis.sigma.data() + model->basis.sigma.size())},
                        {"local_data_ranks", ranks}};
    }
    if (runs) {
        json list = json::array();
        for (const auto& run : *runs) {
            json entry{{"name", run.stem()},
                       {"estimator", std::string(estimation::estimator_name(run.estimator))},
                       {"p", run.p},
                       {"seed_index", run.seed_index},
                       {"failed", run.failed}};
            if (run.seed_index >= 0) {
                const auto seeds = run_seeds(cfg.root_seed, run.p, run.seed_index);
                entry["truth_seed"] = seeds.truth;
                entry["noise_seed"] = seeds.noise;
            }
            if (run.failed) {
                entry["error"] = run.error;
            } else {
                const auto series = run.errors();
                entry["rmse"] = series.time_average();
                entry["rmse_last_half"] = series.last_half_average();
            }
            list.push_back(std::move(entry));
        }
        doc["runs"] = std::move(list);
    }
    if (evaluation) {
        doc["missing_runs"] = evaluation->missing;
        doc["failed_runs"] = evaluation->failed;
        doc["summary_rows"] = evaluation->rows.size();
    }
    json t = json::object();
    for (const auto& [name, seconds] : timings) t[name] = seconds;
    doc["timing_seconds"] = std::move(t);
    if (!error.empty()) doc["error"] = error;
    fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
    codec::write_json_file(path, doc);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    fs::create_directories(cfg.output_dir);
    StageTimings timings;
    const auto total = std::chrono::steady_clock::now();

    ExperimentReport report;
    auto start = std::chrono::steady_clock::now();
    const auto trajectories = training_trajectories(cfg);
    timings.emplace_back("training_data", seconds_since(start));

    start = std::chrono::steady_clock::now();
    report.model = train_from_config(cfg, trajectories);
    io::save_model(cfg.output_dir / "model", report.model);
    timings.emplace_back("training", seconds_since(start));

    start = std::chrono::steady_clock::now();
    report.runs = run_estimation(cfg, report.model);
    timings.emplace_back("estimation", seconds_since(start));

    start = std::chrono::steady_clock::now();
    report.evaluation = evaluate_runs(cfg);
    timings.emplace_back("evaluation", seconds_since(start));
    timings.emplace_back("total", seconds_since(total));

    write_report(cfg.output_dir / "report.json", cfg, "run_experiment", &report.model, &report.runs,
                 &report.evaluation, timings);
    return report;
}

}  // namespace polyrom::harness
