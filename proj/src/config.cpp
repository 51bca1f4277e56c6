#include "invlint/config.hpp"

#include "invlint/hash.hpp"

#include <cmath>
#include <fstream>

namespace invlint {

using nlohmann::json;

namespace {

bool same_kind(const json& value, const json& schema) {
    if (schema.is_number()) {
        if (schema.is_number_float()) return value.is_number();
        return value.is_number_integer() || (value.is_number_float() && value.get<double>() == std::floor(value.get<double>()));
    }
    if (schema.is_null()) return value.is_null() || value.is_object();
    if (schema.is_object()) return value.is_object() || value.is_null();
    return value.type() == schema.type();
}

void check_schema(const json& value, const json& schema, const std::string& where) {
    if (!value.is_object()) throw ConfigError("config" + where + " must be an object");
    for (const auto& [key, v] : value.items()) {
        const std::string path = where + "." + key;
        if (!schema.contains(key)) throw ConfigError("unknown config key '" + path.substr(1) + "'");
        const json& s = schema.at(key);
        if (!same_kind(v, s)) throw ConfigError("config key '" + path.substr(1) + "' has the wrong type");
        if (s.is_object() && v.is_object()) check_schema(v, s, path);
        if (s.is_array() && v.size() != s.size())
            throw ConfigError("config key '" + path.substr(1) + "' must have " + std::to_string(s.size()) + " entries");
    }
}

json schema_template() {
    ExperimentConfig defaults;
    json j = to_json(defaults);
    // Anomalies may be switched off with null, so keep their shape available.
    if (j["dataset"]["map"]["anomaly"].is_null())
        j["dataset"]["map"]["anomaly"] = {{"count", {0, 1}}, {"radius", {4.0, 12.0}}, {"contrast", {-600.0, 600.0}}};
    return j;
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

} // namespace

void ExperimentConfig::finalize() {
    dataset.map.validate();
    dataset.acquisition.validate(dataset.map);
    phi.validate();
    psi.validate();
    decoder.M = psi.M;
    decoder.H = dataset.map.H;
    decoder.W = dataset.map.W;
    decoder.validate();
    train.validate();
    if (!(alpha >= 0.0)) throw ConfigError("alpha must be non-negative");
    if (dataset.n_samples < 1) throw ConfigError("n_samples must be positive");
}

json to_json(const ExperimentConfig& c) {
    return {{"seed", c.seed},
            {"dataset", to_json(c.dataset)},
            {"encoder",
             {{"phi", std::string(to_string(c.phi.family))},
              {"N", c.phi.N},
              {"psi", std::string(to_string(c.psi.family))},
              {"M", c.psi.M},
              {"m_x", c.psi.m_x},
              {"m_z", c.psi.m_z},
              {"alpha", c.alpha},
              {"target", c.target == EmbedTarget::Squared ? "squared" : "normalized"}}},
            {"decoder",
             {{"k", c.decoder.k},
              {"heads", c.decoder.heads},
              {"mlp_ratio", c.decoder.mlp_ratio},
              {"depth", c.decoder.depth},
              {"patch", c.decoder.patch},
              {"d", c.decoder.d},
              {"shared_final", c.decoder.shared_final}}},
            {"train",
             {{"lr_max", c.train.lr_max},
              {"lr_min", c.train.lr_min},
              {"beta1", c.train.beta1},
              {"beta2", c.train.beta2},
              {"eps", c.train.eps},
              {"weight_decay", c.train.weight_decay},
              {"batch_size", c.train.batch_size},
              {"epochs", c.train.epochs},
              {"T0", c.train.T0},
              {"T_mult", c.train.T_mult},
              {"deterministic", c.train.deterministic},
              {"train_on_true_y", c.train_on_true_y}}},
            {"paths", {{"data", c.paths.data}, {"fit", c.paths.fit}, {"train", c.paths.train}, {"eval", c.paths.eval}}}};
}

ExperimentConfig config_from_json(const json& j) {
    check_schema(j, schema_template(), "");
    ExperimentConfig c;
    try {
        read_opt(j, "seed", c.seed);
        if (j.contains("dataset")) c.dataset = dataset_spec_from_json(j.at("dataset"));
        if (j.contains("encoder")) {
            const auto& e = j.at("encoder");
            if (e.contains("phi")) c.phi.family = parse_phi_family(e.at("phi").get<std::string>());
            if (e.contains("psi")) c.psi.family = parse_psi_family(e.at("psi").get<std::string>());
            read_opt(e, "N", c.phi.N);
            read_opt(e, "M", c.psi.M);
            read_opt(e, "m_x", c.psi.m_x);
            read_opt(e, "m_z", c.psi.m_z);
            read_opt(e, "alpha", c.alpha);
            if (e.contains("target")) {
                const auto t = e.at("target").get<std::string>();
                if (t == "normalized") c.target = EmbedTarget::Normalized;
                else if (t == "squared") c.target = EmbedTarget::Squared;
                else throw ConfigError("encoder.target must be 'normalized' or 'squared', got '" + t + "'");
            }
        }
        if (j.contains("decoder")) {
            const auto& d = j.at("decoder");
            read_opt(d, "k", c.decoder.k);
            read_opt(d, "heads", c.decoder.heads);
            read_opt(d, "mlp_ratio", c.decoder.mlp_ratio);
            read_opt(d, "depth", c.decoder.depth);
            read_opt(d, "patch", c.decoder.patch);
            read_opt(d, "d", c.decoder.d);
            read_opt(d, "shared_final", c.decoder.shared_final);
        }
        if (j.contains("train")) {
            const auto& t = j.at("train");
            read_opt(t, "lr_max", c.train.lr_max);
            read_opt(t, "lr_min", c.train.lr_min);
            read_opt(t, "beta1", c.train.beta1);
            read_opt(t, "beta2", c.train.beta2);
            read_opt(t, "eps", c.train.eps);
            read_opt(t, "weight_decay", c.train.weight_decay);
            read_opt(t, "batch_size", c.train.batch_size);
            read_opt(t, "epochs", c.train.epochs);
            read_opt(t, "T0", c.train.T0);
            read_opt(t, "T_mult", c.train.T_mult);
            read_opt(t, "deterministic", c.train.deterministic);
            read_opt(t, "train_on_true_y", c.train_on_true_y);
        }
        if (j.contains("paths")) {
            const auto& p = j.at("paths");
            read_opt(p, "data", c.paths.data);
            read_opt(p, "fit", c.paths.fit);
            read_opt(p, "train", c.paths.train);
            read_opt(p, "eval", c.paths.eval);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    c.train.seed = c.seed;
    c.finalize();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    try {
        return config_from_json(j);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::string config_hash(const ExperimentConfig& cfg) {
    json j = to_json(cfg);
    j.erase("paths");
    j.erase("seed");
    return sha256_hex(j.dump());
}

Gridd embedding_target(const Gridf& velocity_normalized, double v_lo, double v_hi, EmbedTarget target) {
    if (target == EmbedTarget::Normalized) return velocity_normalized.cast<double>();
    const Gridd v = denormalize(velocity_normalized.cast<double>(), v_lo, v_hi) / 1000.0;
    return v.cwiseAbs2();
}

} // namespace invlint
