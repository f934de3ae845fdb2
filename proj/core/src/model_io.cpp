#include "polyrom/model_io.hpp"

#include <cstdio>

#include "json_codec.hpp"
#include "polyrom/binary_io.hpp"
#include "polyrom/errors.hpp"

namespace polyrom::io {

namespace fs = std::filesystem;
using codec::json;

namespace {

std::string local_file(std::size_t i) {
    char name[32];
    std::snprintf(name, sizeof(name), "A_local_%03zu.bin", i);
    return name;
}

}  // namespace

void save_model(const fs::path& dir, const rom::TrainedModel& model) {
    const rom::ModelBank& bank = model.bank;
    const rom::PodBasis& basis = model.basis;
    bank.validate();
    fs::create_directories(dir);

    write_matrix(dir / "U.bin", basis.U);
    write_matrix(dir / "sigma.bin", basis.sigma);
    write_matrix(dir / "V.bin", basis.V);
    write_matrix(dir / "spectrum.bin", basis.spectrum);
    write_matrix(dir / "A_robust.bin", bank.A_robust);

    json locals = json::array();
    for (std::size_t i = 0; i < bank.size(); ++i) {
        write_matrix(dir / local_file(i), bank.A_local[i]);
        json entry{{"p", bank.p_train[i]}, {"file", local_file(i)}};
        if (i < model.local_fits.size()) {
            entry["data_rank"] = model.local_fits[i].data_rank;
            entry["rank_deficient"] = model.local_fits[i].rank_deficient;
        }
        locals.push_back(std::move(entry));
    }

    json doc{{"schema_version", kModelSchemaVersion},
             {"n", basis.state_dim()},
             {"r", basis.rank()},
             {"snapshot_columns", basis.V.rows()},
             {"spectrum_size", basis.spectrum.size()},
             {"retained_energy", basis.retained_energy()},
             {"epsilon", bank.epsilon},
             {"p_min", bank.p_min},
             {"p_max", bank.p_max},
             {"local_models", std::move(locals)}};
    codec::write_json_file(dir / "model.json", doc);
}

rom::TrainedModel load_model(const fs::path& dir) {
    const fs::path doc_path = dir / "model.json";
    if (!fs::exists(doc_path)) throw InvalidInput("model directory " + dir.string() + " has no model.json");
    const json doc = codec::read_json_file(doc_path);
    codec::Reader r(doc, doc_path.string());

    int version = 0;
    long long n = 0, rank = 0, columns = 0, spectrum = 0;
    double energy = 0.0;
    rom::TrainedModel model;
    rom::ModelBank& bank = model.bank;
    r.require("schema_version", version);
    r.require("n", n);
    r.require("r", rank);
    r.require("snapshot_columns", columns);
    r.require("spectrum_size", spectrum);
    r.get("retained_energy", energy);
    r.require("epsilon", bank.epsilon);
    r.require("p_min", bank.p_min);
    r.require("p_max", bank.p_max);
    const json* locals = r.child("local_models");
    r.finish();
    if (version != kModelSchemaVersion) {
        throw InvalidInput(doc_path.string() + ": unsupported schema_version " + std::to_string(version));
    }
    if (n < 1 || rank < 1 || columns < rank || spectrum < rank) {
        throw InvalidInput(doc_path.string() + ": inconsistent dimensions");
    }
    if (!locals || !locals->is_array() || locals->empty()) {
        throw InvalidInput(doc_path.string() + ": 'local_models' must be a non-empty array");
    }

    model.basis.U = read_matrix(dir / "U.bin", n, rank);
    model.basis.sigma = read_matrix(dir / "sigma.bin", rank, 1);
    model.basis.V = read_matrix(dir / "V.bin", columns, rank);
    model.basis.spectrum = read_matrix(dir / "spectrum.bin", spectrum, 1);
    bank.A_robust = read_matrix(dir / "A_robust.bin", rank, rank);

    for (std::size_t i = 0; i < locals->size(); ++i) {
        codec::Reader e((*locals)[i], doc_path.string() + ": local_models[" + std::to_string(i) + "]");
        double p = 0.0;
        std::string file;
        rom::LocalFit fit;
        long long data_rank = rank;
        e.require("p", p);
        e.require("file", file);
        e.get("data_rank", data_rank);
        e.get("rank_deficient", fit.rank_deficient);
        e.finish();
        if (fs::path(file).is_absolute() || file.find("..") != std::string::npos) {
            throw InvalidInput(e.label("file") + " must be a plain name inside the model directory");
        }
        fit.A = read_matrix(dir / file, rank, rank);
        fit.data_rank = static_cast<Eigen::Index>(data_rank);
        bank.p_train.push_back(p);
        bank.A_local.push_back(fit.A);
        model.local_fits.push_back(std::move(fit));
    }
    bank.validate();
    return model;
}

}  // namespace polyrom::io
