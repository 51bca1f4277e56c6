#include "invlint/datagen.hpp"

#include "invlint/hash.hpp"
#include "invlint/parallel.hpp"
#include "invlint/tensor_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <random>

namespace invlint {

namespace fs = std::filesystem;
using nlohmann::json;

void MapSpec::validate() const {
    if (H < 8 || W < 8) throw ConfigError("map must be at least 8x8");
    if (!(dx > 0.0) || !(dz > 0.0)) throw ConfigError("map spacing must be positive");
    if (!(v_min > 0.0) || !(v_min < v_max)) throw ConfigError("need 0 < v_min < v_max");
    if (layers_min < 1 || layers_max < layers_min) throw ConfigError("need 1 <= layers_min <= layers_max");
    if (tilt_max < 0.0) throw ConfigError("tilt_max must be non-negative");
    if (anomaly) {
        if (anomaly->count_min < 0 || anomaly->count_max < anomaly->count_min)
            throw ConfigError("invalid anomaly count range");
        if (!(anomaly->radius_min > 0.0) || anomaly->radius_max < anomaly->radius_min)
            throw ConfigError("invalid anomaly radius range");
        if (anomaly->contrast_max < anomaly->contrast_min) throw ConfigError("invalid anomaly contrast range");
    }
}

std::vector<SourceSpec> Acquisition::sources(const MapSpec& map) const {
    std::vector<SourceSpec> out;
    for (int i = 0; i < n_sources; ++i) {
        const int x = static_cast<int>(std::lround((i + 0.5) * map.W / n_sources - 0.5));
        out.push_back(SourceSpec::ricker(std::clamp(x, 0, map.W - 1), source_z, f0, amplitude));
    }
    return out;
}

ReceiverArray Acquisition::receivers(const MapSpec& map) const { return ReceiverArray::full_line(receiver_z, map.W); }

void Acquisition::validate(const MapSpec& map) const {
    if (n_sources < 1 || n_sources > map.W) throw ConfigError("n_sources must be in [1, W]");
    if (source_z < 0 || source_z >= map.H) throw ConfigError("source depth index outside grid");
    if (receiver_z < 0 || receiver_z >= map.H) throw ConfigError("receiver depth index outside grid");
    if (!(f0 > 0.0)) throw ConfigError("f0 must be positive");
}

SimConfig SimSettings::resolve(const MapSpec& map) const {
    SimConfig cfg;
    cfg.n_steps = n_steps;
    cfg.dt = dt > 0.0 ? dt : stable_dt(map.v_max, map.dx, map.dz, cfl_margin);
    cfg.boundary_width = boundary_width;
    cfg.boundary_taper = boundary_taper;
    cfg.free_surface = free_surface;
    if (cfg.n_steps < 1) throw ConfigError("n_steps must be >= 1");
    if (cfl_number(map.v_max, cfg.dt, map.dx, map.dz) > kCflLimit)
        throw ConfigError("configured dt violates the CFL bound for v_max");
    return cfg;
}

SplitIndices make_splits(std::int64_t n, double val_fraction, double test_fraction) {
    if (n < 1) throw ConfigError("dataset needs at least one sample");
    if (val_fraction < 0.0 || test_fraction < 0.0 || val_fraction + test_fraction >= 1.0)
        throw ConfigError("split fractions must be non-negative and leave room for training");
    const auto n_val = static_cast<std::int64_t>(std::floor(val_fraction * static_cast<double>(n) + 1e-9));
    const auto n_test = static_cast<std::int64_t>(std::floor(test_fraction * static_cast<double>(n) + 1e-9));
    SplitIndices s;
    std::int64_t i = 0;
    for (; i < n - n_val - n_test; ++i) s.train.push_back(i);
    for (; i < n - n_test; ++i) s.val.push_back(i);
    for (; i < n; ++i) s.test.push_back(i);
    return s;
}

std::uint64_t sample_seed(std::uint64_t dataset_seed, std::int64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(dataset_seed), static_cast<std::uint32_t>(dataset_seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(static_cast<std::uint64_t>(index) >> 32)};
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

VelocityMap gen_velocity_map(std::uint64_t seed, const MapSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(seed);
    auto uniform = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
    auto uniform_int = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };

    const int n_layers = uniform_int(spec.layers_min, spec.layers_max);
    struct Interface {
        double depth;
        double slope;
    };
    std::vector<Interface> interfaces;
    for (int i = 1; i < n_layers; ++i)
        interfaces.push_back({uniform(0.1 * spec.H, 0.95 * spec.H), uniform(-spec.tilt_max, spec.tilt_max)});
    std::sort(interfaces.begin(), interfaces.end(), [](auto& a, auto& b) { return a.depth < b.depth; });
    std::vector<double> layer_v(static_cast<std::size_t>(n_layers));
    for (auto& v : layer_v) v = uniform(spec.v_min, spec.v_max);
    if (spec.monotone_depth) std::sort(layer_v.begin(), layer_v.end());

    VelocityMap map;
    map.dx = spec.dx;
    map.dz = spec.dz;
    map.v.resize(spec.H, spec.W);
    const double x_mid = 0.5 * (spec.W - 1);
    for (int z = 0; z < spec.H; ++z) {
        for (int x = 0; x < spec.W; ++x) {
            std::size_t layer = 0;
            for (const auto& f : interfaces)
                if (z >= f.depth + f.slope * (x - x_mid)) ++layer;
            map.v(z, x) = static_cast<float>(layer_v[layer]);
        }
    }

    if (spec.anomaly) {
        const auto& a = *spec.anomaly;
        const int count = uniform_int(a.count_min, a.count_max);
        for (int k = 0; k < count; ++k) {
            const double cx = uniform(0.0, spec.W);
            const double cz = uniform(0.2 * spec.H, spec.H);
            const double rx = uniform(a.radius_min, a.radius_max);
            const double rz = uniform(a.radius_min, a.radius_max);
            const double dv = uniform(a.contrast_min, a.contrast_max);
            for (int z = 0; z < spec.H; ++z)
                for (int x = 0; x < spec.W; ++x) {
                    const double ex = (x - cx) / rx;
                    const double ez = (z - cz) / rz;
                    if (ex * ex + ez * ez <= 1.0) map.v(z, x) += static_cast<float>(dv);
                }
        }
    }
    map.v = map.v.cwiseMax(static_cast<float>(spec.v_min)).cwiseMin(static_cast<float>(spec.v_max));
    return map;
}

json to_json(const DatasetSpec& s) {
    json map = {{"H", s.map.H},
                {"W", s.map.W},
                {"dx", s.map.dx},
                {"dz", s.map.dz},
                {"v_min", s.map.v_min},
                {"v_max", s.map.v_max},
                {"layers", {s.map.layers_min, s.map.layers_max}},
                {"tilt_max", s.map.tilt_max},
                {"monotone_depth", s.map.monotone_depth}};
    if (s.map.anomaly) {
        const auto& a = *s.map.anomaly;
        map["anomaly"] = {{"count", {a.count_min, a.count_max}},
                          {"radius", {a.radius_min, a.radius_max}},
                          {"contrast", {a.contrast_min, a.contrast_max}}};
    } else {
        map["anomaly"] = nullptr;
    }
    return {{"n_samples", s.n_samples},
            {"val_fraction", s.val_fraction},
            {"test_fraction", s.test_fraction},
            {"map", map},
            {"acquisition",
             {{"n_sources", s.acquisition.n_sources},
              {"source_z", s.acquisition.source_z},
              {"f0", s.acquisition.f0},
              {"amplitude", s.acquisition.amplitude},
              {"receiver_z", s.acquisition.receiver_z}}},
            {"sim",
             {{"n_steps", s.sim.n_steps},
              {"dt", s.sim.dt},
              {"cfl_margin", s.sim.cfl_margin},
              {"boundary_width", s.sim.boundary_width},
              {"boundary_taper", s.sim.boundary_taper},
              {"free_surface", s.sim.free_surface}}}};
}

namespace {

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

template <typename T>
void read_pair(const json& j, const char* key, T& lo, T& hi) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_array() || v.size() != 2) throw ConfigError(std::string("'") + key + "' must be a two-element array");
    lo = v[0].get<T>();
    hi = v[1].get<T>();
}

} // namespace

DatasetSpec dataset_spec_from_json(const json& j) {
    DatasetSpec s;
    try {
        read_opt(j, "n_samples", s.n_samples);
        read_opt(j, "val_fraction", s.val_fraction);
        read_opt(j, "test_fraction", s.test_fraction);
        if (j.contains("map")) {
            const auto& m = j.at("map");
            read_opt(m, "H", s.map.H);
            read_opt(m, "W", s.map.W);
            read_opt(m, "dx", s.map.dx);
            read_opt(m, "dz", s.map.dz);
            read_opt(m, "v_min", s.map.v_min);
            read_opt(m, "v_max", s.map.v_max);
            read_pair(m, "layers", s.map.layers_min, s.map.layers_max);
            read_opt(m, "tilt_max", s.map.tilt_max);
            read_opt(m, "monotone_depth", s.map.monotone_depth);
            if (m.contains("anomaly")) {
                if (m.at("anomaly").is_null()) {
                    s.map.anomaly.reset();
                } else {
                    AnomalySpec a;
                    read_pair(m.at("anomaly"), "count", a.count_min, a.count_max);
                    read_pair(m.at("anomaly"), "radius", a.radius_min, a.radius_max);
                    read_pair(m.at("anomaly"), "contrast", a.contrast_min, a.contrast_max);
                    s.map.anomaly = a;
                }
            }
        }
        if (j.contains("acquisition")) {
            const auto& a = j.at("acquisition");
            read_opt(a, "n_sources", s.acquisition.n_sources);
            read_opt(a, "source_z", s.acquisition.source_z);
            read_opt(a, "f0", s.acquisition.f0);
            read_opt(a, "amplitude", s.acquisition.amplitude);
            read_opt(a, "receiver_z", s.acquisition.receiver_z);
        }
        if (j.contains("sim")) {
            const auto& m = j.at("sim");
            read_opt(m, "n_steps", s.sim.n_steps);
            read_opt(m, "dt", s.sim.dt);
            read_opt(m, "cfl_margin", s.sim.cfl_margin);
            read_opt(m, "boundary_width", s.sim.boundary_width);
            read_opt(m, "boundary_taper", s.sim.boundary_taper);
            read_opt(m, "free_surface", s.sim.free_surface);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("dataset config: ") + e.what());
    }
    s.map.validate();
    s.acquisition.validate(s.map);
    return s;
}

json DatasetManifest::to_json() const {
    return {{"format", "invlint-dataset"},
            {"version", 1},
            {"seed", seed},
            {"config_hash", config_hash},
            {"spec", invlint::to_json(spec)},
            {"dt", dt},
            {"dims", {{"N", spec.n_samples}, {"H", spec.map.H}, {"W", spec.map.W}, {"S", S}, {"T", T}, {"R", R}}},
            {"velocity_bounds", {v_lo, v_hi}},
            {"seismic_abs_max", seismic_abs_max},
            {"splits", {{"train", splits.train}, {"val", splits.val}, {"test", splits.test}}},
            {"files",
             {{"velocity", {{"path", "velocity.invt"}, {"sha256", velocity_sha256}}},
              {"seismic", {{"path", "seismic.invt"}, {"sha256", seismic_sha256}}}}}};
}

DatasetManifest DatasetManifest::from_json(const json& j) {
    DatasetManifest m;
    try {
        m.spec = dataset_spec_from_json(j.at("spec"));
        m.seed = j.at("seed").get<std::uint64_t>();
        m.config_hash = j.value("config_hash", "");
        m.dt = j.at("dt").get<double>();
        m.S = j.at("dims").at("S").get<std::int64_t>();
        m.T = j.at("dims").at("T").get<std::int64_t>();
        m.R = j.at("dims").at("R").get<std::int64_t>();
        m.v_lo = j.at("velocity_bounds")[0].get<double>();
        m.v_hi = j.at("velocity_bounds")[1].get<double>();
        m.seismic_abs_max = j.at("seismic_abs_max").get<double>();
        m.splits.train = j.at("splits").at("train").get<std::vector<std::int64_t>>();
        m.splits.val = j.at("splits").at("val").get<std::vector<std::int64_t>>();
        m.splits.test = j.at("splits").at("test").get<std::vector<std::int64_t>>();
        m.velocity_sha256 = j.at("files").at("velocity").at("sha256").get<std::string>();
        m.seismic_sha256 = j.at("files").at("seismic").at("sha256").get<std::string>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed dataset manifest: ") + e.what());
    }
    return m;
}

DatasetManifest build_dataset(std::uint64_t seed, const DatasetSpec& spec, const fs::path& out_dir,
                              const std::string& config_hash) {
    spec.map.validate();
    spec.acquisition.validate(spec.map);
    const SimConfig cfg = spec.sim.resolve(spec.map);
    const auto sources = spec.acquisition.sources(spec.map);
    const auto receivers = spec.acquisition.receivers(spec.map);

    DatasetManifest m;
    m.spec = spec;
    m.seed = seed;
    m.config_hash = config_hash;
    m.dt = cfg.dt;
    m.S = static_cast<std::int64_t>(sources.size());
    m.T = cfg.n_steps;
    m.R = static_cast<std::int64_t>(receivers.x_indices.size());
    m.v_lo = spec.map.v_min;
    m.v_hi = spec.map.v_max;
    m.splits = make_splits(spec.n_samples, spec.val_fraction, spec.test_fraction);

    fs::path staging = out_dir;
    staging += ".partial";
    fs::remove_all(staging);
    fs::create_directories(staging);
    try {
        const auto N = static_cast<std::uint64_t>(spec.n_samples);
        TensorWriter vel_out(staging / "velocity.invt",
                             {N, static_cast<std::uint64_t>(spec.map.H), static_cast<std::uint64_t>(spec.map.W)});
        TensorWriter sei_out(staging / "seismic.invt",
                             {N, static_cast<std::uint64_t>(m.S), static_cast<std::uint64_t>(m.T),
                              static_cast<std::uint64_t>(m.R)});
        const std::int64_t chunk = static_cast<std::int64_t>(4 * worker_count(1u << 20));
        std::vector<VelocityMap> maps;
        std::vector<ShotGather> gathers;
        for (std::int64_t begin = 0; begin < spec.n_samples; begin += chunk) {
            const std::int64_t count = std::min(chunk, spec.n_samples - begin);
            maps.assign(static_cast<std::size_t>(count), {});
            gathers.assign(static_cast<std::size_t>(count), {});
            parallel_for(static_cast<std::size_t>(count), [&](std::size_t k) {
                const std::int64_t i = begin + static_cast<std::int64_t>(k);
                maps[k] = gen_velocity_map(sample_seed(seed, i), spec.map);
                try {
                    gathers[k] = simulate_gather(maps[k], sources, receivers, cfg);
                } catch (const SimulationDiverged& e) {
                    throw SimulationDiverged("sample " + std::to_string(i) + ": " + e.what());
                }
            });
            for (std::size_t k = 0; k < maps.size(); ++k) {
                vel_out.append({maps[k].v.data(), static_cast<std::size_t>(maps[k].v.size())});
                for (const auto& tr : gathers[k].traces) {
                    sei_out.append({tr.data(), static_cast<std::size_t>(tr.size())});
                    m.seismic_abs_max = std::max(m.seismic_abs_max, static_cast<double>(tr.cwiseAbs().maxCoeff()));
                }
            }
        }
        vel_out.close();
        sei_out.close();
        if (!(m.seismic_abs_max > 0.0)) m.seismic_abs_max = 1.0;
        m.velocity_sha256 = sha256_file(staging / "velocity.invt");
        m.seismic_sha256 = sha256_file(staging / "seismic.invt");
        std::ofstream(staging / "manifest.json") << m.to_json().dump(2) << "\n";
        fs::remove_all(out_dir);
        fs::rename(staging, out_dir);
    } catch (...) {
        std::error_code ec;
        fs::remove_all(staging, ec);
        throw;
    }
    return m;
}

DatasetReader::DatasetReader(const fs::path& dir) : dir_(dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw ConfigError("dataset manifest not found: " + (dir / "manifest.json").string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse " + (dir / "manifest.json").string() + ": " + e.what());
    }
    manifest_ = DatasetManifest::from_json(j);
    velocity_.emplace(dir / "velocity.invt");
    seismic_.emplace(dir / "seismic.invt");
    const auto& vd = velocity_->dims();
    const auto& sd = seismic_->dims();
    const auto& ms = manifest_;
    if (vd.size() != 3 || sd.size() != 4 || vd[0] != static_cast<std::uint64_t>(ms.spec.n_samples) ||
        vd[1] != static_cast<std::uint64_t>(ms.spec.map.H) || vd[2] != static_cast<std::uint64_t>(ms.spec.map.W) ||
        sd[0] != vd[0] || sd[1] != static_cast<std::uint64_t>(ms.S) || sd[2] != static_cast<std::uint64_t>(ms.T) ||
        sd[3] != static_cast<std::uint64_t>(ms.R))
        throw ConfigError("dataset tensor dims disagree with manifest: " + dir.string());
}

VelocityMap DatasetReader::velocity(std::int64_t i) {
    VelocityMap map;
    map.dx = manifest_.spec.map.dx;
    map.dz = manifest_.spec.map.dz;
    map.v.resize(manifest_.spec.map.H, manifest_.spec.map.W);
    velocity_->read_slice(static_cast<std::uint64_t>(i), {map.v.data(), static_cast<std::size_t>(map.v.size())});
    return map;
}

Gridf DatasetReader::normalized_velocity(std::int64_t i) {
    return normalize(velocity(i).v, manifest_.v_lo, manifest_.v_hi);
}

ShotGather DatasetReader::gather(std::int64_t i) {
    const auto flat = seismic_->read_slice(static_cast<std::uint64_t>(i));
    ShotGather g;
    g.dt = manifest_.dt;
    const auto block = static_cast<std::size_t>(manifest_.T * manifest_.R);
    for (std::int64_t s = 0; s < manifest_.S; ++s)
        g.traces.push_back(Eigen::Map<const Gridf>(flat.data() + static_cast<std::size_t>(s) * block, manifest_.T,
                                                   manifest_.R));
    return g;
}

} // namespace invlint
