#include "invlint/checkpoint.hpp"

#include "invlint/tensor_io.hpp"

#include <fstream>
#include <map>

namespace invlint {

using nlohmann::json;

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
    return std::filesystem::path(stem.string() + suffix);
}

json to_json(const DecoderConfig& c) {
    return {{"M", c.M},          {"H", c.H},         {"W", c.W},
            {"k", c.k},          {"heads", c.heads}, {"mlp_ratio", c.mlp_ratio},
            {"depth", c.depth},  {"patch", c.patch}, {"d", c.d},
            {"shared_final", c.shared_final}};
}

DecoderConfig decoder_config_from_json(const json& j) {
    DecoderConfig c;
    try {
        c.M = j.at("M").get<int>();
        c.H = j.at("H").get<int>();
        c.W = j.at("W").get<int>();
        c.k = j.at("k").get<int>();
        c.heads = j.at("heads").get<int>();
        c.mlp_ratio = j.at("mlp_ratio").get<int>();
        c.depth = j.at("depth").get<int>();
        c.patch = j.at("patch").get<int>();
        c.d = j.at("d").get<int>();
        c.shared_final = j.at("shared_final").get<bool>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("decoder config: ") + e.what());
    }
    c.validate();
    return c;
}

void save_checkpoint(const std::filesystem::path& stem, const ModelCheckpoint& ckpt) {
    if (ckpt.A.rows() != ckpt.decoder.M) throw ConfigError("encoder map rows do not match the decoder input size");
    std::vector<float> flat;
    json sections = json::array();
    auto add = [&](const std::string& name, const Mat<float>& m) {
        sections.push_back({{"name", name}, {"shape", {m.rows(), m.cols()}}, {"offset", flat.size()}});
        // row-major within each section
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
    };
    add("encoder.A", ckpt.A);
    ckpt.params.visit([&](const std::string& name, const Mat<float>& m, int) { add(name, m); });

    const std::uint64_t n = flat.size();
    write_tensor(with_suffix(stem, ".invt"), std::span<const std::uint64_t>(&n, 1), flat);
    json j = {{"format", "invlint-checkpoint"},
              {"version", 1},
              {"decoder", to_json(ckpt.decoder)},
              {"encoder_dims", {ckpt.A.rows(), ckpt.A.cols()}},
              {"numel", n},
              {"sections", sections},
              {"meta", ckpt.meta}};
    std::ofstream out(with_suffix(stem, ".json"));
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write " + with_suffix(stem, ".json").string());
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& stem) {
    const auto json_path = with_suffix(stem, ".json");
    std::ifstream in(json_path);
    if (!in) throw ConfigError("missing checkpoint '" + json_path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(json_path.string() + ": " + e.what());
    }
    ModelCheckpoint ckpt;
    ckpt.decoder = decoder_config_from_json(j.at("decoder"));
    ckpt.meta = j.value("meta", json::object());
    const Tensor t = read_tensor(with_suffix(stem, ".invt"));
    if (t.dims.size() != 1) throw ConfigError("checkpoint tensor must be rank 1");

    std::map<std::string, json> table;
    for (const auto& s : j.at("sections")) table[s.at("name").get<std::string>()] = s;
    auto fill = [&](const std::string& name, Mat<float>& m, bool resize) {
        const auto it = table.find(name);
        if (it == table.end()) throw ConfigError("checkpoint is missing section '" + name + "'");
        const auto rows = it->second.at("shape")[0].get<Eigen::Index>();
        const auto cols = it->second.at("shape")[1].get<Eigen::Index>();
        const auto offset = it->second.at("offset").get<std::size_t>();
        if (resize) m.resize(rows, cols);
        if (m.rows() != rows || m.cols() != cols) throw ConfigError("checkpoint section '" + name + "' has the wrong shape");
        if (offset + static_cast<std::size_t>(rows * cols) > t.data.size())
            throw ConfigError("checkpoint section '" + name + "' runs past the tensor");
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = t.data[offset + static_cast<std::size_t>(r * cols + c)];
        table.erase(it);
    };
    fill("encoder.A", ckpt.A, true);
    if (ckpt.A.rows() != ckpt.decoder.M) throw ConfigError("encoder map rows do not match the decoder input size");
    ckpt.params = zero_params<float>(ckpt.decoder);
    ckpt.params.visit([&](const std::string& name, Mat<float>& m, int) { fill(name, m, false); });
    if (!table.empty()) throw ConfigError("checkpoint has unexpected section '" + table.begin()->first + "'");
    return ckpt;
}

std::uint64_t checkpoint_numel(const std::filesystem::path& stem) {
    return TensorReader(with_suffix(stem, ".invt")).dims().at(0);
}

} // namespace invlint
