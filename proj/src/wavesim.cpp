#include "invlint/wavesim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace invlint {

void VelocityMap::validate() const {
    if (v.rows() < 8 || v.cols() < 8)
        throw ConfigError("velocity map must be at least 8x8, got " + std::to_string(v.rows()) + "x" +
                          std::to_string(v.cols()));
    if (!(dx > 0.0) || !(dz > 0.0)) throw ConfigError("grid spacing must be positive");
    if (!v.allFinite() || v.minCoeff() <= 0.0f) throw ConfigError("velocities must be finite and positive");
}

ReceiverArray ReceiverArray::full_line(int z_index, int width) {
    ReceiverArray r;
    r.z_index = z_index;
    r.x_indices.resize(static_cast<std::size_t>(width));
    for (int i = 0; i < width; ++i) r.x_indices[static_cast<std::size_t>(i)] = i;
    return r;
}

void ReceiverArray::validate(const VelocityMap& map) const {
    if (x_indices.empty()) throw ConfigError("receiver array is empty");
    if (z_index < 0 || z_index >= map.rows()) throw ConfigError("receiver depth index outside grid");
    for (std::size_t i = 0; i < x_indices.size(); ++i) {
        if (x_indices[i] < 0 || x_indices[i] >= map.cols()) throw ConfigError("receiver x index outside grid");
        if (i > 0 && x_indices[i] <= x_indices[i - 1])
            throw ConfigError("receiver x indices must be strictly increasing");
    }
}

double ricker_wavelet(double f0, double t, double t0) {
    const double a = std::numbers::pi * std::numbers::pi * f0 * f0 * (t - t0) * (t - t0);
    return (1.0 - 2.0 * a) * std::exp(-a);
}

double cfl_number(double v_max, double dt, double dx, double dz) {
    return v_max * dt * std::sqrt(1.0 / (dx * dx) + 1.0 / (dz * dz));
}

double stable_dt(double v_max, double dx, double dz, double margin) {
    return (1.0 - margin) * kCflLimit / (v_max * std::sqrt(1.0 / (dx * dx) + 1.0 / (dz * dz)));
}

namespace {

constexpr int kHalo = 2;
constexpr float kC0 = -2.5f;
constexpr float kC1 = 4.0f / 3.0f;
constexpr float kC2 = -1.0f / 12.0f;

// Padded simulation domain: physical map surrounded by sponge cells (none on
// top when the free surface is active) and a two-cell zero halo.
struct Domain {
    int top = 0;
    int nb = 0;
    int nz = 0;  // rows incl. halo
    int nx = 0;  // cols incl. halo
    Gridf coef;  // (c dt)^2
    Gridf damp;

    int row(int iz) const { return iz + top + kHalo; }
    int col(int ix) const { return ix + nb + kHalo; }
};

Domain build_domain(const VelocityMap& map, const SimConfig& cfg) {
    Domain d;
    d.nb = cfg.boundary_width;
    d.top = cfg.free_surface ? 0 : d.nb;
    const int H = static_cast<int>(map.rows());
    const int W = static_cast<int>(map.cols());
    d.nz = d.top + H + d.nb + 2 * kHalo;
    d.nx = d.nb + W + d.nb + 2 * kHalo;
    d.coef = Gridf::Zero(d.nz, d.nx);
    d.damp = Gridf::Ones(d.nz, d.nx);
    const double dt2 = cfg.dt * cfg.dt;
    for (int r = kHalo; r < d.nz - kHalo; ++r) {
        const int iz = std::clamp(r - kHalo - d.top, 0, H - 1);
        // sponge depth counted from the inner edge: 1 .. nb
        int jz = 0;
        if (r - kHalo < d.top) jz = d.top - (r - kHalo);
        if (r - kHalo >= d.top + H) jz = r - kHalo - d.top - H + 1;
        for (int c = kHalo; c < d.nx - kHalo; ++c) {
            const int ix = std::clamp(c - kHalo - d.nb, 0, W - 1);
            int jx = 0;
            if (c - kHalo < d.nb) jx = d.nb - (c - kHalo);
            if (c - kHalo >= d.nb + W) jx = c - kHalo - d.nb - W + 1;
            const double v = map.v(iz, ix);
            d.coef(r, c) = static_cast<float>(v * v * dt2);
            d.damp(r, c) = static_cast<float>(std::exp(-cfg.boundary_taper * (jz * jz + jx * jx)));
        }
    }
    return d;
}

} // namespace

Gridf simulate_shot(const VelocityMap& map, const SourceSpec& src, const ReceiverArray& rcv, const SimConfig& cfg) {
    map.validate();
    rcv.validate(map);
    if (cfg.n_steps < 1) throw ConfigError("n_steps must be >= 1");
    if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
    if (cfg.boundary_width < 0 || cfg.boundary_taper < 0.0) throw ConfigError("invalid absorbing boundary");
    if (!(src.f0 > 0.0)) throw ConfigError("source peak frequency must be positive");
    if (src.x_index < 0 || src.x_index >= map.cols() || src.z_index < 0 || src.z_index >= map.rows())
        throw ConfigError("source position outside grid");
    const double v_max = map.v.maxCoeff();
    const double cfl = cfl_number(v_max, cfg.dt, map.dx, map.dz);
    if (cfl > kCflLimit)
        throw ConfigError("CFL number " + std::to_string(cfl) + " exceeds stability bound " +
                          std::to_string(kCflLimit));

    const Domain d = build_domain(map, cfg);
    Gridf cur = Gridf::Zero(d.nz, d.nx);
    Gridf prev = Gridf::Zero(d.nz, d.nx);
    const float idx2 = static_cast<float>(1.0 / (map.dx * map.dx));
    const float idz2 = static_cast<float>(1.0 / (map.dz * map.dz));
    const int sr = d.row(src.z_index);
    const int sc = d.col(src.x_index);
    const double src_scale = src.amplitude * d.coef(sr, sc) / (map.dx * map.dz);
    const int surface = d.row(0);

    const auto R = static_cast<Eigen::Index>(rcv.x_indices.size());
    Gridf traces(cfg.n_steps, R);
    const int rr = d.row(rcv.z_index);

    for (int n = 0; n < cfg.n_steps; ++n) {
        for (Eigen::Index j = 0; j < R; ++j) traces(n, j) = cur(rr, d.col(rcv.x_indices[static_cast<std::size_t>(j)]));
        if (!traces.row(n).allFinite())
            throw SimulationDiverged("simulation diverged (non-finite pressure) at step " + std::to_string(n));

        if (cfg.free_surface) {
            cur.row(surface).setZero();
            cur.row(surface - 1) = -cur.row(surface + 1);
            cur.row(surface - 2) = -cur.row(surface + 2);
        }
        for (int r = kHalo; r < d.nz - kHalo; ++r) {
            const float* p = cur.row(r).data();
            const float* pu1 = cur.row(r - 1).data();
            const float* pu2 = cur.row(r - 2).data();
            const float* pd1 = cur.row(r + 1).data();
            const float* pd2 = cur.row(r + 2).data();
            const float* k = d.coef.row(r).data();
            float* out = prev.row(r).data();
            for (int c = kHalo; c < d.nx - kHalo; ++c) {
                const float lap_x = (kC0 * p[c] + kC1 * (p[c - 1] + p[c + 1]) + kC2 * (p[c - 2] + p[c + 2])) * idx2;
                const float lap_z = (kC0 * p[c] + kC1 * (pu1[c] + pd1[c]) + kC2 * (pu2[c] + pd2[c])) * idz2;
                out[c] = 2.0f * p[c] - out[c] + k[c] * (lap_x + lap_z);
            }
        }
        // lap(p) - p_tt / c^2 = s  =>  p_tt = c^2 (lap(p) - s)
        const double s = ricker_wavelet(src.f0, n * cfg.dt, src.t0);
        prev(sr, sc) -= static_cast<float>(src_scale * s);
        prev.array() *= d.damp.array();
        cur.array() *= d.damp.array();
        if (cfg.free_surface) prev.row(surface).setZero();
        cur.swap(prev);
    }
    if (!cur.allFinite()) throw SimulationDiverged("simulation diverged (non-finite pressure) at final step");
    return traces;
}

ShotGather simulate_gather(const VelocityMap& v, const std::vector<SourceSpec>& sources, const ReceiverArray& rcv,
                           const SimConfig& cfg) {
    ShotGather g;
    g.dt = cfg.dt;
    g.traces.reserve(sources.size());
    for (std::size_t s = 0; s < sources.size(); ++s) {
        try {
            g.traces.push_back(simulate_shot(v, sources[s], rcv, cfg));
        } catch (const SimulationDiverged& e) {
            throw SimulationDiverged("source " + std::to_string(s) + ": " + e.what());
        } catch (const ConfigError& e) {
            throw ConfigError("source " + std::to_string(s) + ": " + e.what());
        }
    }
    return g;
}

double pick_first_arrival(const Eigen::Ref<const Eigen::VectorXd>& trace, double dt, double fraction) {
    const double peak = trace.cwiseAbs().maxCoeff();
    if (!(peak > 0.0)) return -1.0;
    const double threshold = fraction * peak;
    for (Eigen::Index i = 0; i < trace.size(); ++i) {
        const double b = std::abs(trace[i]);
        if (b < threshold) continue;
        if (i == 0) return 0.0;
        const double a = std::abs(trace[i - 1]);
        return (static_cast<double>(i - 1) + (threshold - a) / (b - a)) * dt;
    }
    return -1.0;
}

} // namespace invlint
