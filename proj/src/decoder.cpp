#include "invlint/decoder.hpp"

#include <cmath>

namespace invlint {

void DecoderConfig::validate() const {
    if (M < 1) throw ConfigError("decoder input dimension M must be >= 1");
    if (H < 1 || W < 1) throw ConfigError("decoder output must be non-empty");
    if (k < 1 || heads < 1 || k % heads != 0) throw ConfigError("k must be a positive multiple of heads");
    if (mlp_ratio < 1) throw ConfigError("mlp_ratio must be >= 1");
    if (depth < 0) throw ConfigError("depth must be >= 0");
    if (patch < 1) throw ConfigError("patch must be >= 1");
    const int b = block();
    if (b < 1 || b > H || b > W)
        throw ConfigError("block size " + std::to_string(b) + " must lie in [1, min(H, W)]");
    if (h() * b < H || w() * b < W) throw ConfigError("blocks of size " + std::to_string(b) + " cannot cover the map");
}

std::vector<int> DecoderConfig::offsets(int extent, int count) const {
    const int b = block();
    std::vector<int> out(static_cast<std::size_t>(count), 0);
    for (int i = 1; i < count; ++i)
        out[static_cast<std::size_t>(i)] =
            static_cast<int>(std::lround(static_cast<double>(i) * (extent - b) / static_cast<double>(count - 1)));
    return out;
}

Eigen::MatrixXi overlap_counts(const DecoderConfig& cfg) {
    const int b = cfg.block();
    Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(cfg.H, cfg.W);
    for (int oz : cfg.offsets_z())
        for (int ox : cfg.offsets_x()) counts.block(oz, ox, b, b).array() += 1;
    if (counts.minCoeff() == 0) throw ConfigError("block placement leaves cells uncovered");
    return counts;
}

} // namespace invlint
