#pragma once

// A model checkpoint is two files sharing a stem:
//   <stem>.invt  rank-1 float32 tensor holding every parameter back to back
//   <stem>.json  decoder config, metadata and a section table
//                [{name, shape, offset}] into the flat tensor
// The encoder map A is stored as the first section, "encoder.A".

#include "invlint/decoder.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>

namespace invlint {

struct ModelCheckpoint {
    DecoderConfig decoder;
    Mat<float> A;  // M x P
    DecoderParams<float> params;
    nlohmann::json meta = nlohmann::json::object();
};

nlohmann::json to_json(const DecoderConfig& cfg);
DecoderConfig decoder_config_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& stem, const ModelCheckpoint& ckpt);
ModelCheckpoint load_checkpoint(const std::filesystem::path& stem);

/// Number of float32 elements in the serialized tensor.
std::uint64_t checkpoint_numel(const std::filesystem::path& stem);

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix);

} // namespace invlint
