#pragma once

#include <filesystem>

#include "polyrom/model_bank.hpp"

namespace polyrom::io {

inline constexpr int kModelSchemaVersion = 1;

/// Writes model.json plus U.bin, sigma.bin, V.bin, spectrum.bin,
/// A_robust.bin and A_local_NNN.bin (same binary convention as datasets).
void save_model(const std::filesystem::path& dir, const rom::TrainedModel& model);

/// Inverse of save_model; the loaded matrices are bit-identical to the saved ones.
rom::TrainedModel load_model(const std::filesystem::path& dir);

}  // namespace polyrom::io
