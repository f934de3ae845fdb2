#include "polyrom/binary_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "polyrom/errors.hpp"

namespace polyrom::io {

namespace {

std::uint64_t to_little_endian(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        std::uint64_t out = 0;
        for (int i = 0; i < 8; ++i) out |= ((v >> (8 * i)) & 0xFFu) << (8 * (7 - i));
        return out;
    }
}

}  // namespace

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
    std::vector<std::uint64_t> words(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        words[static_cast<std::size_t>(i)] = to_little_endian(std::bit_cast<std::uint64_t>(m.data()[i]));
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(words.data()),
              static_cast<std::streamsize>(words.size() * sizeof(std::uint64_t)));
    if (!out) throw InvalidInput("failed writing " + path.string());
}

Matrix read_matrix(const std::filesystem::path& path, Eigen::Index rows, Eigen::Index cols) {
    std::error_code ec;
    const auto bytes = std::filesystem::file_size(path, ec);
    if (ec) throw InvalidInput("cannot read " + path.string() + ": " + ec.message());
    const auto expected = static_cast<std::uintmax_t>(rows) * static_cast<std::uintmax_t>(cols) * 8u;
    if (bytes != expected) {
        std::ostringstream msg;
        msg << path.string() << ": expected " << rows << "x" << cols << " float64 values ("
            << expected << " bytes) but the file holds " << bytes << " bytes";
        if (rows > 0 && bytes % (static_cast<std::uintmax_t>(rows) * 8u) == 0) {
            msg << " (" << bytes / (static_cast<std::uintmax_t>(rows) * 8u) << " columns)";
        }
        throw InvalidInput(msg.str());
    }

    std::vector<std::uint64_t> words(static_cast<std::size_t>(rows * cols));
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open " + path.string());
    in.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(expected));
    if (!in) throw InvalidInput("short read from " + path.string());

    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        const double v = std::bit_cast<double>(to_little_endian(words[static_cast<std::size_t>(i)]));
        if (!std::isfinite(v)) {
            std::ostringstream msg;
            msg << path.string() << ": non-finite value at column " << i / rows << ", row "
                << i % rows << " (byte offset " << i * 8 << ")";
            throw InvalidInput(msg.str());
        }
        m.data()[i] = v;
    }
    return m;
}

}  // namespace polyrom::io
