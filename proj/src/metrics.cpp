#include "invlint/metrics.hpp"

#include "invlint/parallel.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace invlint {

Eigen::VectorXd ssim_window() {
    Eigen::VectorXd w(kSsimWindow);
    const int half = kSsimWindow / 2;
    for (int i = 0; i < kSsimWindow; ++i) w(i) = std::exp(-0.5 * (i - half) * (i - half) / (kSsimSigma * kSsimSigma));
    return w / w.sum();
}

namespace {

// Separable 'valid' filtering with the SSIM window.
Gridd filter_valid(const Gridd& x, const Eigen::VectorXd& w) {
    const Eigen::Index n = w.size();
    const Eigen::Index rows = x.rows() - n + 1, cols = x.cols() - n + 1;
    Gridd horiz(x.rows(), cols);
    for (Eigen::Index r = 0; r < x.rows(); ++r)
        for (Eigen::Index c = 0; c < cols; ++c) horiz(r, c) = x.row(r).segment(c, n).dot(w.transpose());
    Gridd out(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = horiz.col(c).segment(r, n).dot(w);
    return out;
}

} // namespace

double ssim(const Gridd& a, const Gridd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw ConfigError("ssim shape mismatch");
    if (a.rows() < kSsimWindow || a.cols() < kSsimWindow)
        throw ConfigError("ssim needs grids of at least " + std::to_string(kSsimWindow) + "x" +
                          std::to_string(kSsimWindow));
    const double c1 = (kSsimK1 * kSsimRange) * (kSsimK1 * kSsimRange);
    const double c2 = (kSsimK2 * kSsimRange) * (kSsimK2 * kSsimRange);
    const Eigen::VectorXd w = ssim_window();
    const Gridd mu_a = filter_valid(a, w);
    const Gridd mu_b = filter_valid(b, w);
    const Gridd saa = filter_valid(a.cwiseProduct(a), w) - mu_a.cwiseAbs2();
    const Gridd sbb = filter_valid(b.cwiseProduct(b), w) - mu_b.cwiseAbs2();
    const Gridd sab = filter_valid(a.cwiseProduct(b), w) - mu_a.cwiseProduct(mu_b);
    const auto num = (2.0 * mu_a.array() * mu_b.array() + c1) * (2.0 * sab.array() + c2);
    const auto den = (mu_a.array().square() + mu_b.array().square() + c1) * (saa.array() + sbb.array() + c2);
    return (num / den).mean();
}

std::int64_t count_params(const DecoderConfig& cfg, EncoderDims enc) {
    cfg.validate();
    const std::int64_t n = cfg.tokens(), k = cfg.k, hid = cfg.hidden(), bb = cfg.block() * cfg.block();
    const std::int64_t linear_a = enc.in * enc.out;
    const std::int64_t l1 = cfg.M * n * k + n * k;
    const std::int64_t pos = n * k;
    const std::int64_t block = 2 * k + 4 * (k * k + k) + 2 * k + (k * hid + hid) + (hid * k + k);
    const std::int64_t lr = (k * bb + bb) * (cfg.shared_final ? 1 : n);
    return linear_a + l1 + pos + cfg.depth * block + lr;
}

std::int64_t count_flops(const DecoderConfig& cfg, EncoderDims enc) {
    cfg.validate();
    const std::int64_t n = cfg.tokens(), k = cfg.k, hid = cfg.hidden(), bb = cfg.block() * cfg.block();
    const std::int64_t linear_a = 2 * enc.in * enc.out;
    const std::int64_t l1 = 2 * cfg.M * n * k + n * k;
    const std::int64_t pos = n * k;
    const std::int64_t projections = 4 * n * (2 * k * k + k);
    const std::int64_t scores = 2 * n * n * k + 2 * n * n * k;
    const std::int64_t mlp = n * (2 * k * hid + hid) + n * (2 * hid * k + k);
    const std::int64_t residual = 2 * n * k;
    const std::int64_t block = projections + scores + mlp + residual;
    const std::int64_t lr = n * (2 * k * bb + bb);
    const std::int64_t stitch = n * bb + static_cast<std::int64_t>(cfg.H) * cfg.W;
    return linear_a + l1 + pos + cfg.depth * block + lr + stitch;
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
    return os.str();
}

} // namespace

nlohmann::json EvalReport::to_json() const {
    nlohmann::json per = nlohmann::json::array();
    for (const auto& s : samples) per.push_back({{"index", s.index}, {"mae", s.mae}, {"mse", s.mse}, {"ssim", s.ssim}});
    return {{"mae", mae},
            {"mse", mse},
            {"ssim", ssim},
            {"n_params", n_params},
            {"flops", flops},
            {"flop_convention", "multiply-add counts as 2; normalisation, softmax and GELU not counted"},
            {"baseline_mae", baseline_mae},
            {"samples", per}};
}

std::string EvalReport::summary_csv() const {
    return "mae,mse,ssim,n_params,flops,baseline_mae\n" + fmt(mae) + "," + fmt(mse) + "," + fmt(ssim) + "," +
           std::to_string(n_params) + "," + std::to_string(flops) + "," + fmt(baseline_mae) + "\n";
}

std::string EvalReport::samples_csv() const {
    std::string out = "index,mae,mse,ssim\n";
    for (const auto& s : samples)
        out += std::to_string(s.index) + "," + fmt(s.mae) + "," + fmt(s.mse) + "," + fmt(s.ssim) + "\n";
    return out;
}

EvalReport score_maps(const std::vector<Gridf>& pred, const std::vector<Gridf>& target,
                      const std::vector<std::int64_t>& indices, double lo, double hi) {
    if (pred.size() != target.size() || pred.size() != indices.size())
        throw ConfigError("prediction, target and index counts differ");
    if (pred.empty()) throw ConfigError("nothing to evaluate");
    EvalReport r;
    r.samples.resize(pred.size());
    parallel_for(pred.size(), [&](std::size_t i) {
        const MaeMse e = mae_mse(pred[i], target[i], lo, hi);
        r.samples[i] = {indices[i], e.mae, e.mse, ssim(pred[i], target[i])};
    });
    for (const auto& s : r.samples) {
        r.mae += s.mae;
        r.mse += s.mse;
        r.ssim += s.ssim;
    }
    const double n = static_cast<double>(r.samples.size());
    r.mae /= n;
    r.mse /= n;
    r.ssim /= n;
    return r;
}

} // namespace invlint
