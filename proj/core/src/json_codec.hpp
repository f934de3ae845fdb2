#pragma once

// Internal JSON mapping for configuration structs. Reading is strict:
// unknown keys and wrongly typed values raise InvalidInput with the key path.

#include <string>

#include <nlohmann/json.hpp>

#include "polyrom/burgers.hpp"
#include "polyrom/errors.hpp"
#include "polyrom/kalman.hpp"

namespace polyrom::codec {

using nlohmann::json;

class Reader {
public:
    Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw InvalidInput(label() + " must be a JSON object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.push_back(key);
        auto it = obj_.find(key);
        if (it == obj_.end()) return;
        try {
            out = it->template get<T>();
        } catch (const json::exception& e) {
            throw InvalidInput(label(key) + ": " + e.what());
        }
    }

    template <class T>
    void require(const char* key, T& out) {
        if (!obj_.contains(key)) throw InvalidInput(label(key) + " is required");
        get(key, out);
    }

    const json* child(const char* key) {
        seen_.push_back(key);
        auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    std::string label(const std::string& key = {}) const {
        std::string base = path_.empty() ? std::string("config") : path_;
        return key.empty() ? base : base + "." + key;
    }

    /// Throws on keys that no get/require/child call asked for.
    void finish() const {
        for (const auto& item : obj_.items()) {
            bool known = false;
            for (const auto& k : seen_) known = known || (k == item.key());
            if (!known) throw InvalidInput("unknown key " + label(item.key()));
        }
    }

private:
    const json& obj_;
    std::string path_;
    std::vector<std::string> seen_;
};

inline json to_json(const pde::BurgersConfig& c) {
    return json{{"domain_length", c.domain_length}, {"grid_size", c.grid_size},
                {"nu1", c.nu1},
                {"nu2", c.nu2},
                {"omega1", c.omega1},
                {"omega2", c.omega2},
                {"forcing_amplitude", c.forcing_amplitude},
                {"dt_solver", c.dt_solver},
                {"dt_snapshot", c.dt_snapshot},
                {"transient_time", c.transient_time},
                {"cfl", c.cfl},
                {"dealias", c.dealias},
                {"nonlinear", c.nonlinear}};
}

inline void from_json(const json& j, pde::BurgersConfig& c, const std::string& path) {
    Reader r(j, path);
    r.get("domain_length", c.domain_length);
    r.get("grid_size", c.grid_size);
    r.get("nu1", c.nu1);
    r.get("nu2", c.nu2);
    r.get("omega1", c.omega1);
    r.get("omega2", c.omega2);
    r.get("forcing_amplitude", c.forcing_amplitude);
    r.get("dt_solver", c.dt_solver);
    r.get("dt_snapshot", c.dt_snapshot);
    r.get("transient_time", c.transient_time);
    r.get("cfl", c.cfl);
    r.get("dealias", c.dealias);
    r.get("nonlinear", c.nonlinear);
    r.finish();
}

inline json to_json(const estimation::NoiseConfig& c) {
    return json{{"q_state", c.q_state}, {"q_param", c.q_param}, {"r_meas", c.r_meas}};
}

inline void from_json(const json& j, estimation::NoiseConfig& c, const std::string& path) {
    Reader r(j, path);
    r.get("q_state", c.q_state);
    r.get("q_param", c.q_param);
    r.get("r_meas", c.r_meas);
    r.finish();
}

inline json to_json(const estimation::UkfParams& c) {
    return json{{"alpha", c.alpha}, {"beta", c.beta}, {"kappa", c.kappa}};
}

inline void from_json(const json& j, estimation::UkfParams& c, const std::string& path) {
    Reader r(j, path);
    r.get("alpha", c.alpha);
    r.get("beta", c.beta);
    r.get("kappa", c.kappa);
    r.finish();
}

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& value);

}  // namespace polyrom::codec
