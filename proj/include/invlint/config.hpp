#pragma once

// One JSON document drives every subcommand. Missing keys take defaults;
// unknown keys and wrongly typed values are rejected.

#include "invlint/datagen.hpp"
#include "invlint/decoder.hpp"
#include "invlint/training.hpp"
#include "invlint/transforms.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>

namespace invlint {

enum class EmbedTarget { Normalized, Squared };

struct ExperimentConfig {
    DatasetSpec dataset;
    PhiSpec phi;
    PsiSpec psi;
    DecoderConfig decoder;  // M, H, W follow psi and dataset.map
    TrainConfig train;
    double alpha = 1.0;
    EmbedTarget target = EmbedTarget::Normalized;
    bool train_on_true_y = false;
    std::uint64_t seed = 0;

    struct Paths {
        std::string data = "data";
        std::string fit = "fit";
        std::string train = "train";
        std::string eval = "eval";
    } paths;

    /// Re-derives dependent fields and validates every section.
    void finalize();
};

nlohmann::json to_json(const ExperimentConfig& cfg);

/// Overlays `j` on the defaults after checking it against the default schema.
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Throws ConfigError naming the path if it is missing or malformed.
ExperimentConfig load_config(const std::filesystem::path& path);

/// SHA-256 of the canonical JSON form, excluding paths and seed.
std::string config_hash(const ExperimentConfig& cfg);

/// Embedding target y for a velocity map: the normalised map, or (v / 1000)^2.
Gridd embedding_target(const Gridf& velocity_normalized, double v_lo, double v_hi, EmbedTarget target);

} // namespace invlint
