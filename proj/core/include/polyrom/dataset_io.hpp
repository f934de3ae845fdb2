#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "polyrom/burgers.hpp"
#include "polyrom/trajectory.hpp"

namespace polyrom::io {

inline constexpr int kDatasetSchemaVersion = 1;

/// Provenance stored next to the trajectories.
struct DatasetMetadata {
    std::optional<pde::BurgersConfig> solver;
    std::map<std::string, std::uint64_t> seeds;
};

/// Writes `manifest.json` and one `traj_NNN.bin` per trajectory into `dir`
/// (created if missing). Every trajectory must share n, snapshot count and dt.
///
/// Manifest layout:
///   { "schema_version": 1, "n": int, "m": int, "q": int, "dt": float, "t0": float,
///     "trajectories": [ { "p": float, "file": "traj_000.bin",
///                         "t0": float (optional), "substeps": int (optional) } ],
///     "solver": { BurgersConfig fields } (optional), "seeds": { name: uint } (optional) }
/// Each binary holds n x (m + 1) little-endian float64 values, column-major.
void write_dataset(const std::filesystem::path& dir, const std::vector<Trajectory>& trajectories,
                   const DatasetMetadata& metadata = {});

struct Dataset {
    std::vector<Trajectory> trajectories;
    DatasetMetadata metadata;
};

/// Reads and validates a dataset directory produced by write_dataset or any
/// external tool following the same manifest. Parameters must be strictly
/// increasing. Errors name the offending file.
Dataset ingest_external_dataset(const std::filesystem::path& dir);

}  // namespace polyrom::io
