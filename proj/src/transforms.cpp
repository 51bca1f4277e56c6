#include "invlint/transforms.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace invlint {

namespace {

constexpr double kPi = std::numbers::pi;

constexpr std::array<std::pair<PhiFamily, std::string_view>, 7> kPhiNames{{
    {PhiFamily::SinTMeanX, "sin_t_mean_x"},
    {PhiFamily::SinTSinX, "sin_t_sin_x"},
    {PhiFamily::SinTCosX, "sin_t_cos_x"},
    {PhiFamily::CosTSinX, "cos_t_sin_x"},
    {PhiFamily::SinSumTX, "sin_sum_tx"},
    {PhiFamily::SinTPlusSinX, "sin_t_plus_sin_x"},
    {PhiFamily::IdentitySkip, "identity_skip"},
}};

constexpr std::array<std::pair<PsiFamily, std::string_view>, 8> kPsiNames{{
    {PsiFamily::Gaussian, "gaussian"},
    {PsiFamily::Sinc, "sinc"},
    {PsiFamily::GaussianSmallSigma, "gaussian_small_sigma"},
    {PsiFamily::SinSin, "sin_sin"},
    {PsiFamily::CosSin, "cos_sin"},
    {PsiFamily::SinCos, "sin_cos"},
    {PsiFamily::SinSum, "sin_sum"},
    {PsiFamily::SinPlusSin, "sin_plus_sin"},
}};

int exact_sqrt(int m) {
    const int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m))));
    return r * r == m ? r : 0;
}

} // namespace

const std::vector<PhiFamily>& phi_menu() {
    static const std::vector<PhiFamily> menu{PhiFamily::SinTMeanX, PhiFamily::SinTSinX, PhiFamily::SinTCosX,
                                             PhiFamily::CosTSinX,  PhiFamily::SinSumTX, PhiFamily::SinTPlusSinX};
    return menu;
}

const std::vector<PsiFamily>& psi_menu() {
    static const std::vector<PsiFamily> menu{PsiFamily::Gaussian, PsiFamily::Sinc,   PsiFamily::GaussianSmallSigma,
                                             PsiFamily::SinSin,   PsiFamily::CosSin, PsiFamily::SinCos,
                                             PsiFamily::SinSum,   PsiFamily::SinPlusSin};
    return menu;
}

std::string_view to_string(PhiFamily f) {
    for (auto& [k, name] : kPhiNames)
        if (k == f) return name;
    throw ConfigError("unknown encoder kernel family");
}

std::string_view to_string(PsiFamily f) {
    for (auto& [k, name] : kPsiNames)
        if (k == f) return name;
    throw ConfigError("unknown property kernel family");
}

PhiFamily parse_phi_family(std::string_view name) {
    for (auto& [k, n] : kPhiNames)
        if (n == name) return k;
    throw ConfigError("unknown encoder kernel family '" + std::string(name) + "'");
}

PsiFamily parse_psi_family(std::string_view name) {
    for (auto& [k, n] : kPsiNames)
        if (n == name) return k;
    throw ConfigError("unknown property kernel family '" + std::string(name) + "'");
}

void PhiSpec::validate() const {
    to_string(family);
    if (N < 1) throw ConfigError("encoder kernel count N must be >= 1");
}

bool PsiSpec::radial() const {
    return family == PsiFamily::Gaussian || family == PsiFamily::GaussianSmallSigma || family == PsiFamily::Sinc;
}

int PsiSpec::centers_x() const {
    if (m_x > 0) return m_x;
    const int r = exact_sqrt(M);
    if (r == 0) throw ConfigError("M = " + std::to_string(M) + " is not square; set the center grid explicitly");
    return r;
}

int PsiSpec::centers_z() const {
    if (m_z > 0) return m_z;
    return M / centers_x();
}

double PsiSpec::base_sigma() const {
    return std::min(1.0 / centers_x(), 1.0 / centers_z());
}

void PsiSpec::validate() const {
    to_string(family);
    if (M < 1) throw ConfigError("property kernel count M must be >= 1");
    if (radial() && centers_x() * centers_z() != M)
        throw ConfigError("center grid " + std::to_string(centers_x()) + "x" + std::to_string(centers_z()) +
                          " does not hold M = " + std::to_string(M) + " centers");
}

double phi_value(const PhiSpec& spec, int n, double x, double t) {
    if (n < 1 || n > spec.N) throw ConfigError("kernel index out of range");
    const double w = n * kPi;
    switch (spec.family) {
    case PhiFamily::SinTMeanX:
        return std::sin(w * t);  // normalised x range has unit length
    case PhiFamily::SinTSinX:
        return std::sin(w * t) * std::sin(w * x);
    case PhiFamily::SinTCosX:
        return std::sin(w * t) * std::cos(w * x);
    case PhiFamily::CosTSinX:
        return std::cos(w * t) * std::sin(w * x);
    case PhiFamily::SinSumTX:
        return std::sin(w * (x + t));
    case PhiFamily::SinTPlusSinX:
        return std::sin(w * t) + std::sin(w * x);
    case PhiFamily::IdentitySkip:
        throw ConfigError("identity_skip has no kernel values");
    }
    throw ConfigError("unknown encoder kernel family");
}

double psi_value(const PsiSpec& spec, int m, double x, double z) {
    if (m < 1 || m > spec.M) throw ConfigError("kernel index out of range");
    if (spec.radial()) {
        const int mx = spec.centers_x();
        const int mz = spec.centers_z();
        const int idx = m - 1;
        const double mu_x = (idx % mx + 0.5) / mx;
        const double mu_z = (idx / mx + 0.5) / mz;
        const double r2 = (x - mu_x) * (x - mu_x) + (z - mu_z) * (z - mu_z);
        if (spec.family == PsiFamily::Sinc) {
            const double r = std::sqrt(r2);
            return r == 0.0 ? kPi : std::sin(kPi * r) / r;
        }
        double sigma = spec.base_sigma();
        if (spec.family == PsiFamily::GaussianSmallSigma) sigma /= 3.0;
        return std::exp(-r2 / (2.0 * sigma * sigma));
    }
    const double w = m * kPi;
    switch (spec.family) {
    case PsiFamily::SinSin:
        return std::sin(w * x) * std::sin(w * z);
    case PsiFamily::CosSin:
        return std::cos(w * x) * std::sin(w * z);
    case PsiFamily::SinCos:
        return std::sin(w * x) * std::cos(w * z);
    case PsiFamily::SinSum:
        return std::sin(w * (x + z));
    case PsiFamily::SinPlusSin:
        return std::sin(w * x) + std::sin(w * z);
    default:
        break;
    }
    throw ConfigError("unknown property kernel family");
}

Eigen::Index embedding_u_size(const PhiSpec& spec, Eigen::Index S, Eigen::Index T, Eigen::Index R) {
    return spec.family == PhiFamily::IdentitySkip ? S * T * R : S * spec.N;
}

MeasurementEncoder::MeasurementEncoder(const PhiSpec& spec, Eigen::Index T, Eigen::Index R)
    : spec_(spec), T_(T), R_(R) {
    spec.validate();
    if (T < 1 || R < 1) throw ConfigError("gather must have at least one sample and receiver");
    if (spec.family == PhiFamily::IdentitySkip) return;

    auto table = [&](Eigen::Index len, auto fn) {
        Eigen::MatrixXd out(spec.N, len);
        for (int n = 1; n <= spec.N; ++n)
            for (Eigen::Index i = 0; i < len; ++i) out(n - 1, i) = fn(n * kPi * ((static_cast<double>(i) + 0.5) / len));
        return out;
    };
    auto sin_fn = [](double a) { return std::sin(a); };
    auto cos_fn = [](double a) { return std::cos(a); };
    auto one_fn = [](double) { return 1.0; };

    switch (spec.family) {
    case PhiFamily::SinTMeanX:
        terms_.push_back({table(T, sin_fn), {}, true});
        break;
    case PhiFamily::SinTSinX:
        terms_.push_back({table(T, sin_fn), table(R, sin_fn), false});
        break;
    case PhiFamily::SinTCosX:
        terms_.push_back({table(T, sin_fn), table(R, cos_fn), false});
        break;
    case PhiFamily::CosTSinX:
        terms_.push_back({table(T, cos_fn), table(R, sin_fn), false});
        break;
    case PhiFamily::SinSumTX:
        terms_.push_back({table(T, sin_fn), table(R, cos_fn), false});
        terms_.push_back({table(T, cos_fn), table(R, sin_fn), false});
        break;
    case PhiFamily::SinTPlusSinX:
        terms_.push_back({table(T, sin_fn), {}, true});
        terms_.push_back({table(T, one_fn), table(R, sin_fn), false});
        break;
    case PhiFamily::IdentitySkip:
        break;
    }
}

Eigen::VectorXd MeasurementEncoder::encode_shot(const Eigen::Ref<const Gridf>& traces) const {
    if (traces.rows() != T_ || traces.cols() != R_) throw ConfigError("trace matrix shape does not match encoder");
    if (!traces.allFinite()) throw ConfigError("gather contains non-finite samples");
    if (spec_.family == PhiFamily::IdentitySkip) {
        Eigen::VectorXd flat(T_ * R_);
        Eigen::Map<Gridd>(flat.data(), T_, R_) = traces.cast<double>();
        return flat;
    }
    const Gridd g = traces.cast<double>();
    Eigen::VectorXd u = Eigen::VectorXd::Zero(spec_.N);
    Eigen::VectorXd row_sum;
    for (const auto& term : terms_) {
        if (term.space_is_ones) {
            if (row_sum.size() == 0) row_sum = g.rowwise().sum();
            u.noalias() += term.time * row_sum;
        } else {
            const Eigen::MatrixXd proj = term.time * g;  // N x R
            u += proj.cwiseProduct(term.space).rowwise().sum();
        }
    }
    return u / static_cast<double>(T_ * R_);
}

Eigen::VectorXd MeasurementEncoder::encode(const ShotGather& g) const {
    const Eigen::Index block = embedding_u_size(spec_, 1, T_, R_);
    Eigen::VectorXd u(block * g.sources());
    for (Eigen::Index s = 0; s < g.sources(); ++s) u.segment(s * block, block) = encode_shot(g.traces[static_cast<std::size_t>(s)]);
    return u;
}

Eigen::VectorXd encode_measurement(const ShotGather& g, const PhiSpec& spec) {
    if (g.traces.empty()) throw ConfigError("gather has no sources");
    return MeasurementEncoder(spec, g.samples(), g.receivers()).encode(g);
}

PropertyEmbedder::PropertyEmbedder(const PsiSpec& spec, Eigen::Index H, Eigen::Index W) : spec_(spec), H_(H), W_(W) {
    spec.validate();
    if (H < 1 || W < 1) throw ConfigError("property grid must be non-empty");
    weights_.resize(spec.M, H * W);
    const double area = 1.0 / static_cast<double>(H * W);
    for (int m = 1; m <= spec.M; ++m)
        for (Eigen::Index z = 0; z < H; ++z)
            for (Eigen::Index x = 0; x < W; ++x)
                weights_(m - 1, z * W + x) =
                    psi_value(spec, m, (static_cast<double>(x) + 0.5) / W, (static_cast<double>(z) + 0.5) / H) * area;
}

Eigen::VectorXd PropertyEmbedder::embed(const Gridd& y) const {
    if (y.rows() != H_ || y.cols() != W_) throw ConfigError("property grid shape does not match embedder");
    if (!y.allFinite()) throw ConfigError("property grid contains non-finite values");
    return weights_ * Eigen::Map<const Eigen::VectorXd>(y.data(), y.size());
}

} // namespace invlint
