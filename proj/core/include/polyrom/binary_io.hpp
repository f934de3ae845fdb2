#pragma once

#include <filesystem>

#include "polyrom/linalg.hpp"

namespace polyrom::io {

/// Raw little-endian float64, column-major, no header.
void write_matrix(const std::filesystem::path& path, const Matrix& m);

/// Reads a rows x cols matrix written by write_matrix. Throws InvalidInput
/// naming the file when the size disagrees or a value is not finite (the
/// message gives the column, row and byte offset of the first bad value).
Matrix read_matrix(const std::filesystem::path& path, Eigen::Index rows, Eigen::Index cols);

}  // namespace polyrom::io
