#pragma once

// Integral-transform embeddings. Measurements u(x, t) are projected onto
// analytic kernels Phi_n(x, t), properties y(x, z) onto Psi_m(x, z), each by
// a midpoint-rule double sum over coordinates normalised to [0, 1]:
//
//   U_n = sum_t sum_x u(x, t) Phi_n(x, t) dx dt
//   Y_m = sum_z sum_x y(x, z) Psi_m(x, z) dx dz
//
// Kernel indices are 1-based: n in 1..N, m in 1..M.

#include "invlint/types.hpp"
#include "invlint/wavesim.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace invlint {

enum class PhiFamily {
    SinTMeanX,      // sin(n pi t) 1(x) / (x_max - x_min)
    SinTSinX,       // sin(n pi t) sin(n pi x)
    SinTCosX,       // sin(n pi t) cos(n pi x)
    CosTSinX,       // cos(n pi t) sin(n pi x)
    SinSumTX,       // sin(n pi (x + t))
    SinTPlusSinX,   // sin(n pi t) + sin(n pi x)
    IdentitySkip,   // no transform, gather is flattened
};

enum class PsiFamily {
    Gaussian,            // exp(-|r - mu_m|^2 / 2 sigma^2)
    Sinc,                // sin(pi |r - mu_m|) / |r - mu_m|
    GaussianSmallSigma,  // Gaussian with sigma / 3
    SinSin,              // sin(m pi x) sin(m pi z)
    CosSin,              // cos(m pi x) sin(m pi z)
    SinCos,              // sin(m pi x) cos(m pi z)
    SinSum,              // sin(m pi (x + z))
    SinPlusSin,          // sin(m pi x) + sin(m pi z)
};

/// Encoder kernels in ablation-table order (identity_skip excluded).
const std::vector<PhiFamily>& phi_menu();
/// Property kernels in ablation-table order.
const std::vector<PsiFamily>& psi_menu();

std::string_view to_string(PhiFamily f);
std::string_view to_string(PsiFamily f);
PhiFamily parse_phi_family(std::string_view name);
PsiFamily parse_psi_family(std::string_view name);

struct PhiSpec {
    PhiFamily family = PhiFamily::SinTMeanX;
    int N = 256;

    void validate() const;
};

struct PsiSpec {
    PsiFamily family = PsiFamily::Gaussian;
    int M = 144;
    // Center grid for the radial families; m_x * m_z == M. Zero means square.
    int m_x = 0;
    int m_z = 0;

    bool radial() const;
    int centers_x() const;
    int centers_z() const;
    /// Spacing of adjacent centers along the finer axis (before the sigma / 3 variant).
    double base_sigma() const;
    void validate() const;
};

double phi_value(const PhiSpec& spec, int n, double x_norm, double t_norm);
double psi_value(const PsiSpec& spec, int m, double x_norm, double z_norm);

/// Length of the measurement embedding for S sources of T x R traces.
Eigen::Index embedding_u_size(const PhiSpec& spec, Eigen::Index S, Eigen::Index T, Eigen::Index R);

/// Cached kernel tables for one (spec, T, R) geometry.
class MeasurementEncoder {
public:
    MeasurementEncoder(const PhiSpec& spec, Eigen::Index T, Eigen::Index R);

    /// Embedding of one T x R trace matrix, length N (or T * R for identity_skip).
    Eigen::VectorXd encode_shot(const Eigen::Ref<const Gridf>& traces) const;
    /// Per-source blocks concatenated in source order.
    Eigen::VectorXd encode(const ShotGather& g) const;

    const PhiSpec& spec() const { return spec_; }

private:
    // U = sum_k rowdot(time_k * traces, space_k) * dx * dt
    struct Term {
        Eigen::MatrixXd time;   // N x T
        Eigen::MatrixXd space;  // N x R
        bool space_is_ones = false;
    };
    PhiSpec spec_;
    Eigen::Index T_, R_;
    std::vector<Term> terms_;
};

class PropertyEmbedder {
public:
    PropertyEmbedder(const PsiSpec& spec, Eigen::Index H, Eigen::Index W);

    Eigen::VectorXd embed(const Gridd& y) const;
    /// M x (H W) kernel weights including the cell area, row-major over (z, x).
    const Eigen::MatrixXd& weights() const { return weights_; }

private:
    PsiSpec spec_;
    Eigen::Index H_, W_;
    Eigen::MatrixXd weights_;
};

Eigen::VectorXd encode_measurement(const ShotGather& g, const PhiSpec& spec);

template <typename Derived>
Eigen::VectorXd embed_property(const Eigen::MatrixBase<Derived>& y, const PsiSpec& spec) {
    const Gridd yd = y.template cast<double>();
    return PropertyEmbedder(spec, yd.rows(), yd.cols()).embed(yd);
}

} // namespace invlint
