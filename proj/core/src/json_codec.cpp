#include "json_codec.hpp"

#include <fstream>

namespace polyrom::codec {

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidInput(path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const json& value) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
    out << value.dump(2) << '\n';
    if (!out) throw InvalidInput("failed writing " + path.string());
}

}  // namespace polyrom::codec
