#pragma once

#include "invlint/tensor_io.hpp"
#include "invlint/types.hpp"
#include "invlint/wavesim.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace invlint {

struct AnomalySpec {
    int count_min = 0;
    int count_max = 1;
    double radius_min = 4.0;  // cells
    double radius_max = 12.0;
    double contrast_min = -600.0;  // m/s
    double contrast_max = 600.0;
};

struct MapSpec {
    int H = 64;
    int W = 64;
    double dx = 10.0;
    double dz = 10.0;
    double v_min = 1500.0;
    double v_max = 4500.0;
    int layers_min = 2;
    int layers_max = 6;
    double tilt_max = 0.15;  // interface slope, cells per cell
    std::optional<AnomalySpec> anomaly = AnomalySpec{};
    bool monotone_depth = true;

    void validate() const;
};

/// Surface acquisition: sources evenly spread along x, receivers on one line.
struct Acquisition {
    int n_sources = 3;
    int source_z = 1;
    double f0 = 10.0;
    double amplitude = 1.0;
    int receiver_z = 1;

    std::vector<SourceSpec> sources(const MapSpec& map) const;
    ReceiverArray receivers(const MapSpec& map) const;
    void validate(const MapSpec& map) const;
};

struct SimSettings {
    int n_steps = 600;
    double dt = 0.0;  // 0 = derive from CFL with cfl_margin
    double cfl_margin = 0.2;
    int boundary_width = 20;
    double boundary_taper = 0.0035;
    bool free_surface = true;

    SimConfig resolve(const MapSpec& map) const;
};

struct SplitIndices {
    std::vector<std::int64_t> train;
    std::vector<std::int64_t> val;
    std::vector<std::int64_t> test;
};

/// Contiguous train / val / test blocks; val and test sizes are floor(fraction * n).
SplitIndices make_splits(std::int64_t n, double val_fraction, double test_fraction);

VelocityMap gen_velocity_map(std::uint64_t seed, const MapSpec& spec);

/// Affine map of [lo, hi] onto [-1, 1].
template <typename Derived>
auto normalize(const Eigen::MatrixBase<Derived>& x, double lo, double hi) {
    using S = typename Derived::Scalar;
    if (!(hi > lo)) throw ConfigError("normalize: hi must exceed lo");
    return (S(2) * (x.array() - S(lo)) / S(hi - lo) - S(1)).matrix().eval();
}

template <typename Derived>
auto denormalize(const Eigen::MatrixBase<Derived>& x, double lo, double hi) {
    using S = typename Derived::Scalar;
    if (!(hi > lo)) throw ConfigError("denormalize: hi must exceed lo");
    return ((x.array() + S(1)) * S(0.5 * (hi - lo)) + S(lo)).matrix().eval();
}

struct DatasetSpec {
    std::int64_t n_samples = 2400;
    double val_fraction = 1.0 / 12.0;
    double test_fraction = 1.0 / 12.0;
    MapSpec map;
    Acquisition acquisition;
    SimSettings sim;
};

nlohmann::json to_json(const DatasetSpec& spec);
DatasetSpec dataset_spec_from_json(const nlohmann::json& j);

/// On-disk layout: velocity.invt (N x H x W), seismic.invt (N x S x T x R), manifest.json.
struct DatasetManifest {
    DatasetSpec spec;
    std::uint64_t seed = 0;
    double dt = 0.0;
    std::int64_t S = 0, T = 0, R = 0;
    double v_lo = 0.0, v_hi = 1.0;  // velocity normalization bounds
    double seismic_abs_max = 0.0;   // largest stored |sample|; embeddings divide by it
    std::string config_hash;
    SplitIndices splits;
    std::string velocity_sha256;
    std::string seismic_sha256;

    nlohmann::json to_json() const;
    static DatasetManifest from_json(const nlohmann::json& j);
};

/// Simulates every sample and writes the dataset directory. Output goes to a
/// sibling staging directory first and is removed if anything throws.
DatasetManifest build_dataset(std::uint64_t seed, const DatasetSpec& spec, const std::filesystem::path& out_dir,
                              const std::string& config_hash = {});

/// Per-sample seed derived from the dataset seed.
std::uint64_t sample_seed(std::uint64_t dataset_seed, std::int64_t index);

class DatasetReader {
public:
    explicit DatasetReader(const std::filesystem::path& dir);

    const DatasetManifest& manifest() const { return manifest_; }
    std::int64_t size() const { return manifest_.spec.n_samples; }
    VelocityMap velocity(std::int64_t i);
    ShotGather gather(std::int64_t i);
    /// Velocity mapped onto [-1, 1] with the manifest bounds.
    Gridf normalized_velocity(std::int64_t i);

private:
    std::filesystem::path dir_;
    DatasetManifest manifest_;
    std::optional<TensorReader> velocity_;
    std::optional<TensorReader> seismic_;
};

} // namespace invlint
