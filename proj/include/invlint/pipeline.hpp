#pragma once

// Stages shared by the subcommands: embedding a dataset, fitting the encoder
// map, training the decoder, predicting and scoring. The in-memory functions
// are reused by the ablation sweeps; the run_* wrappers read and write
// artifact directories.

#include "invlint/checkpoint.hpp"
#include "invlint/config.hpp"
#include "invlint/datagen.hpp"
#include "invlint/linmap.hpp"
#include "invlint/metrics.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace invlint {

/// Measurement embeddings of every sample (n x P), seismic scaled to [-1, 1].
Eigen::MatrixXd embed_measurements(DatasetReader& reader, const PhiSpec& phi);

/// Normalised velocity maps of every sample.
std::vector<Gridf> load_targets(DatasetReader& reader);

/// Property embeddings (n x M) of the target maps.
Eigen::MatrixXd embed_properties(const std::vector<Gridf>& targets, const PsiSpec& psi, EmbedTarget target, double v_lo,
                                 double v_hi);

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<std::int64_t>& rows);

template <typename T>
std::vector<T> take(const std::vector<T>& v, const std::vector<std::int64_t>& idx) {
    std::vector<T> out;
    out.reserve(idx.size());
    for (const auto i : idx) out.push_back(v.at(static_cast<std::size_t>(i)));
    return out;
}

struct FitOutcome {
    LinearMap<double> map;
    RegressionReport train;
    std::optional<RegressionReport> test;
};

/// Column-scaled ridge on the training rows, reported on train and test rows.
FitOutcome fit_encoder(const Eigen::MatrixXd& U, const Eigen::MatrixXd& Y, const SplitIndices& splits, double alpha);

/// Decoder inputs: A U (or the true Y when requested) paired with target maps.
TrainData make_train_data(const Eigen::MatrixXd& A, const Eigen::MatrixXd& U, const Eigen::MatrixXd& Y,
                          const std::vector<Gridf>& targets, const SplitIndices& splits, bool true_y);

/// Trains in 64-bit when cfg.train.deterministic, 32-bit otherwise; returns float parameters.
struct TrainOutcome {
    DecoderParams<float> best;
    int best_epoch = -1;
    std::vector<EpochLog> log;
};
TrainOutcome train_model(const TrainData& data, const ExperimentConfig& cfg,
                         const std::function<void(const DecoderParams<float>&, int)>& on_best = {});

/// Maps predicted for the given rows of U.
std::vector<Gridf> predict_maps(const Mat<float>& A, const DecoderParams<float>& params, const DecoderConfig& dcfg,
                                const Eigen::MatrixXd& U);

/// MAE of predicting the mean training map for every evaluated target (m/s).
double mean_map_baseline(const std::vector<Gridf>& train_targets, const std::vector<Gridf>& eval_targets, double lo,
                         double hi);

std::string epoch_log_csv(const std::vector<EpochLog>& log);
std::string regression_csv(const FitOutcome& fit);
std::string spectrum_csv(const Eigen::VectorXd& spectrum);

// ---- artifact directories ---------------------------------------------------

struct RunIdentity {
    std::string config_hash;
    std::uint64_t seed = 0;
};
RunIdentity identity(const ExperimentConfig& cfg);

DatasetManifest run_gen(const ExperimentConfig& cfg, const std::filesystem::path& out);

/// Writes A.invt, U.invt, Y.invt, regression.csv, fit.json.
FitOutcome run_fit(const ExperimentConfig& cfg, const std::filesystem::path& data, const std::filesystem::path& out);

/// Writes model.invt / model.json (best validation epoch), train_log.csv, train.json.
TrainOutcome run_train(const ExperimentConfig& cfg, const std::filesystem::path& data, const std::filesystem::path& fit,
                       const std::filesystem::path& out);

enum class Split { Train, Val, Test };
Split parse_split(const std::string& name);

/// Scores the checkpoint (or an INVT stack of normalised predictions) on a split.
/// Writes eval.csv, eval_summary.csv, eval.json and predictions.invt.
EvalReport run_eval(const ExperimentConfig& cfg, const std::filesystem::path& data, const std::filesystem::path& fit,
                    const std::filesystem::path& checkpoint, const std::optional<std::filesystem::path>& predictions,
                    Split split, const std::filesystem::path& out);

enum class Sweep { Kernels, Counts, Arch };
Sweep parse_sweep(const std::string& name);

struct AblationRow {
    std::string table;    // encoder / decoder / counts / arch
    std::string variant;
    EvalReport report;
};

std::vector<AblationRow> run_ablate(const ExperimentConfig& cfg, const std::filesystem::path& data, Sweep sweep,
                                    const std::filesystem::path& out);
std::string ablation_csv(const std::vector<AblationRow>& rows);

void write_text(const std::filesystem::path& path, const std::string& text);
nlohmann::json read_json(const std::filesystem::path& path);

/// Lists every regular file in `dir` with its SHA-256 in dir/run.json.
void write_run_record(const std::filesystem::path& dir, const std::string& command, const RunIdentity& id);

} // namespace invlint
