#include "polyrom/dataset_io.hpp"

#include <cmath>
#include <cstdio>

#include "json_codec.hpp"
#include "polyrom/binary_io.hpp"
#include "polyrom/errors.hpp"

namespace polyrom::io {

namespace fs = std::filesystem;
using codec::json;

namespace {

std::string trajectory_file(std::size_t i) {
    char name[32];
    std::snprintf(name, sizeof(name), "traj_%03zu.bin", i);
    return name;
}

}  // namespace

void write_dataset(const fs::path& dir, const std::vector<Trajectory>& trajectories,
                   const DatasetMetadata& metadata) {
    if (trajectories.empty()) throw InvalidInput("cannot write an empty dataset");
    const Trajectory& first = trajectories.front();
    for (const auto& t : trajectories) {
        t.validate();
        if (t.state_dim() != first.state_dim() || t.snapshot_count() != first.snapshot_count() ||
            t.dt != first.dt) {
            throw InvalidInput("trajectories in one dataset must share n, snapshot count and dt");
        }
    }
    fs::create_directories(dir);

    json manifest;
    manifest["schema_version"] = kDatasetSchemaVersion;
    manifest["n"] = first.state_dim();
    manifest["m"] = first.pair_count();
    manifest["q"] = trajectories.size();
    manifest["dt"] = first.dt;
    manifest["t0"] = first.t0;
    json entries = json::array();
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        const auto& t = trajectories[i];
        const std::string file = trajectory_file(i);
        write_matrix(dir / file, t.snapshots);
        entries.push_back({{"p", t.p}, {"file", file}, {"t0", t.t0}, {"substeps", t.substeps}});
    }
    manifest["trajectories"] = std::move(entries);
    if (metadata.solver) manifest["solver"] = codec::to_json(*metadata.solver);
    if (!metadata.seeds.empty()) manifest["seeds"] = metadata.seeds;
    codec::write_json_file(dir / "manifest.json", manifest);
}

Dataset ingest_external_dataset(const fs::path& dir) {
    const fs::path manifest_path = dir / "manifest.json";
    if (!fs::exists(manifest_path)) {
        throw InvalidInput("dataset " + dir.string() + " has no manifest.json");
    }
    const json manifest = codec::read_json_file(manifest_path);
    codec::Reader r(manifest, manifest_path.string());

    int version = 0;
    long long n = 0, m = 0, q = 0;
    double dt = 0.0, t0 = 0.0;
    r.require("schema_version", version);
    r.require("n", n);
    r.require("m", m);
    r.require("q", q);
    r.require("dt", dt);
    r.get("t0", t0);
    if (version != kDatasetSchemaVersion) {
        throw InvalidInput(manifest_path.string() + ": unsupported schema_version " +
                           std::to_string(version));
    }
    if (n < 1 || m < 1 || q < 1) {
        throw InvalidInput(manifest_path.string() + ": n, m and q must be positive");
    }
    if (!(dt > 0.0) || !std::isfinite(dt) || !std::isfinite(t0)) {
        throw InvalidInput(manifest_path.string() + ": dt must be positive and t0 finite");
    }

    Dataset out;
    if (const json* solver = r.child("solver")) {
        pde::BurgersConfig cfg;
        codec::from_json(*solver, cfg, r.label("solver"));
        out.metadata.solver = cfg;
    }
    r.get("seeds", out.metadata.seeds);

    const json* entries = r.child("trajectories");
    if (!entries || !entries->is_array()) {
        throw InvalidInput(manifest_path.string() + ": 'trajectories' must be an array");
    }
    r.finish();
    if (static_cast<long long>(entries->size()) != q) {
        throw InvalidInput(manifest_path.string() + ": q = " + std::to_string(q) + " but " +
                           std::to_string(entries->size()) + " trajectories are listed");
    }

    for (std::size_t i = 0; i < entries->size(); ++i) {
        codec::Reader e((*entries)[i], manifest_path.string() + ": trajectories[" +
                                           std::to_string(i) + "]");
        Trajectory t;
        std::string file;
        t.dt = dt;
        t.t0 = t0;
        e.require("p", t.p);
        e.require("file", file);
        e.get("t0", t.t0);
        e.get("substeps", t.substeps);
        e.finish();
        if (!std::isfinite(t.p)) throw InvalidInput(e.label("p") + " is not finite");
        if (fs::path(file).is_absolute() || file.find("..") != std::string::npos) {
            throw InvalidInput(e.label("file") + " must be a plain name inside the dataset");
        }
        t.snapshots = read_matrix(dir / file, n, m + 1);
        if (!out.trajectories.empty() && !(t.p > out.trajectories.back().p)) {
            throw InvalidInput(e.label("p") + ": parameters must be strictly increasing");
        }
        out.trajectories.push_back(std::move(t));
    }
    return out;
}

}  // namespace polyrom::io
