#pragma once

// 2D constant-density acoustic finite-difference modelling:
//   lap(p) - p_tt / c^2 = s
// Second order in time, fourth order in space, exponential sponge on the
// absorbing sides and an optional pressure-release free surface at z = 0.

#include "invlint/types.hpp"

#include <vector>

namespace invlint {

struct VelocityMap {
    Gridf v;  // rows = depth (z), cols = horizontal (x), m/s
    double dx = 10.0;
    double dz = 10.0;

    Eigen::Index rows() const { return v.rows(); }
    Eigen::Index cols() const { return v.cols(); }
    /// Throws ConfigError unless H, W >= 8, spacing > 0 and all velocities positive and finite.
    void validate() const;
};

struct SourceSpec {
    int x_index = 0;
    int z_index = 0;
    double f0 = 10.0;
    double t0 = 0.15;
    double amplitude = 1.0;

    /// Source with the default 1.5 / f0 wavelet delay.
    static SourceSpec ricker(int x_index, int z_index, double f0, double amplitude = 1.0) {
        return {x_index, z_index, f0, 1.5 / f0, amplitude};
    }
};

struct ReceiverArray {
    int z_index = 0;
    std::vector<int> x_indices;

    static ReceiverArray full_line(int z_index, int width);
    void validate(const VelocityMap& v) const;
};

struct SimConfig {
    double dt = 1e-3;
    int n_steps = 600;
    int boundary_width = 20;
    double boundary_taper = 0.0035;
    bool free_surface = true;
};

/// One T x R trace matrix per source.
struct ShotGather {
    std::vector<Gridf> traces;
    double dt = 0.0;

    Eigen::Index sources() const { return static_cast<Eigen::Index>(traces.size()); }
    Eigen::Index samples() const { return traces.empty() ? 0 : traces.front().rows(); }
    Eigen::Index receivers() const { return traces.empty() ? 0 : traces.front().cols(); }
};

/// (1 - 2 pi^2 f0^2 tau^2) exp(-pi^2 f0^2 tau^2), tau = t - t0.
double ricker_wavelet(double f0, double t, double t0);

/// c_max dt sqrt(1/dx^2 + 1/dz^2); must not exceed kCflLimit.
double cfl_number(double v_max, double dt, double dx, double dz);
inline constexpr double kCflLimit = 0.70710678118654752440;

/// Largest stable dt shrunk by the relative margin (0.2 keeps 80 % of the bound).
double stable_dt(double v_max, double dx, double dz, double margin = 0.2);

Gridf simulate_shot(const VelocityMap& v, const SourceSpec& src, const ReceiverArray& rcv, const SimConfig& cfg);

ShotGather simulate_gather(const VelocityMap& v, const std::vector<SourceSpec>& sources, const ReceiverArray& rcv,
                           const SimConfig& cfg);

/// Time of the first sample whose magnitude reaches `fraction` of the trace
/// maximum, linearly interpolated between samples. Negative if the trace is all zero.
double pick_first_arrival(const Eigen::Ref<const Eigen::VectorXd>& trace, double dt, double fraction);

} // namespace invlint
