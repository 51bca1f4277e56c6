#include "invlint/pipeline.hpp"

#include "invlint/hash.hpp"
#include "invlint/parallel.hpp"
#include "invlint/tensor_io.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

namespace invlint {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
    return os.str();
}

void write_matrix(const fs::path& path, const Eigen::MatrixXd& m) {
    const std::vector<std::uint64_t> dims{static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())};
    const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> f = m.cast<float>();
    write_tensor(path, dims, std::span<const float>(f.data(), static_cast<std::size_t>(f.size())));
}

Eigen::MatrixXd read_matrix(const fs::path& path) {
    if (!fs::exists(path)) throw ConfigError("missing artifact '" + path.string() + "'");
    const Tensor t = read_tensor(path);
    if (t.dims.size() != 2) throw ConfigError("'" + path.string() + "' is not a matrix");
    const auto rows = static_cast<Eigen::Index>(t.dims[0]), cols = static_cast<Eigen::Index>(t.dims[1]);
    return Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(t.data.data(), rows,
                                                                                                  cols)
        .cast<double>();
}

void check_dataset(const ExperimentConfig& cfg, const DatasetManifest& m) {
    if (m.spec.map.H != cfg.dataset.map.H || m.spec.map.W != cfg.dataset.map.W)
        throw ConfigError("dataset maps are " + std::to_string(m.spec.map.H) + "x" + std::to_string(m.spec.map.W) +
                          " but the config expects " + std::to_string(cfg.dataset.map.H) + "x" +
                          std::to_string(cfg.dataset.map.W));
}

const std::vector<std::int64_t>& split_rows(const SplitIndices& s, Split split) {
    switch (split) {
    case Split::Train: return s.train;
    case Split::Val: return s.val;
    case Split::Test: return s.test;
    }
    return s.test;
}

// Test rows, or validation rows when the test split is empty.
const std::vector<std::int64_t>& holdout(const SplitIndices& s) { return s.test.empty() ? s.val : s.test; }

EncoderDims encoder_dims(const ExperimentConfig& cfg, const DatasetManifest& m) {
    return {embedding_u_size(cfg.phi, m.S, m.T, m.R), cfg.psi.M};
}

ModelCheckpoint make_checkpoint(const ExperimentConfig& cfg, const Mat<float>& A, const DecoderParams<float>& p,
                                int best_epoch) {
    const RunIdentity id = identity(cfg);
    ModelCheckpoint ck{cfg.decoder, A, p, {{"config_hash", id.config_hash}, {"seed", id.seed}, {"best_epoch", best_epoch}}};
    return ck;
}

EvalReport evaluate(const ExperimentConfig& cfg, const DatasetManifest& m, const std::vector<Gridf>& pred,
                    const std::vector<Gridf>& targets, const std::vector<std::int64_t>& rows) {
    EvalReport r = score_maps(pred, take(targets, rows), rows, m.v_lo, m.v_hi);
    const EncoderDims dims = encoder_dims(cfg, m);
    r.n_params = count_params(cfg.decoder, dims);
    r.flops = count_flops(cfg.decoder, dims);
    r.baseline_mae = mean_map_baseline(take(targets, m.splits.train), take(targets, rows), m.v_lo, m.v_hi);
    return r;
}

} // namespace

Eigen::MatrixXd embed_measurements(DatasetReader& reader, const PhiSpec& phi) {
    const auto& m = reader.manifest();
    const MeasurementEncoder enc(phi, m.T, m.R);
    const Eigen::Index n = reader.size();
    Eigen::MatrixXd U(n, embedding_u_size(phi, m.S, m.T, m.R));
    const double scale = m.seismic_abs_max > 0.0 ? 1.0 / m.seismic_abs_max : 1.0;
    const Eigen::Index chunk = static_cast<Eigen::Index>(8 * worker_count(static_cast<std::size_t>(n)));
    for (Eigen::Index begin = 0; begin < n; begin += chunk) {
        const Eigen::Index count = std::min(chunk, n - begin);
        std::vector<ShotGather> gathers;
        for (Eigen::Index i = 0; i < count; ++i) gathers.push_back(reader.gather(begin + i));
        parallel_for(static_cast<std::size_t>(count), [&](std::size_t i) {
            U.row(begin + static_cast<Eigen::Index>(i)) = enc.encode(gathers[i]).transpose() * scale;
        });
    }
    return U;
}

std::vector<Gridf> load_targets(DatasetReader& reader) {
    std::vector<Gridf> out;
    out.reserve(static_cast<std::size_t>(reader.size()));
    for (std::int64_t i = 0; i < reader.size(); ++i) out.push_back(reader.normalized_velocity(i));
    return out;
}

Eigen::MatrixXd embed_properties(const std::vector<Gridf>& targets, const PsiSpec& psi, EmbedTarget target, double v_lo,
                                 double v_hi) {
    if (targets.empty()) return Eigen::MatrixXd(0, psi.M);
    const PropertyEmbedder emb(psi, targets.front().rows(), targets.front().cols());
    Eigen::MatrixXd Y(static_cast<Eigen::Index>(targets.size()), psi.M);
    parallel_for(targets.size(), [&](std::size_t i) {
        Y.row(static_cast<Eigen::Index>(i)) = emb.embed(embedding_target(targets[i], v_lo, v_hi, target)).transpose();
    });
    return Y;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<std::int64_t>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
    return out;
}

FitOutcome fit_encoder(const Eigen::MatrixXd& U, const Eigen::MatrixXd& Y, const SplitIndices& splits, double alpha) {
    if (U.rows() != Y.rows()) throw ConfigError("U and Y sample counts differ");
    if (splits.train.empty()) throw ConfigError("the training split is empty");
    const Eigen::MatrixXd Ut = take_rows(U, splits.train), Yt = take_rows(Y, splits.train);
    FitOutcome out{fit_ridge_scaled(Ut, Yt, alpha), {}, std::nullopt};
    out.train = regression_report(out.map.A, Ut, Yt);
    out.map.stats.train_mae = out.train.mae;
    out.map.stats.train_mse = out.train.mse;
    if (!splits.test.empty()) {
        out.test = regression_report(out.map.A, take_rows(U, splits.test), take_rows(Y, splits.test));
        out.map.stats.test_mae = out.test->mae;
        out.map.stats.test_mse = out.test->mse;
    }
    return out;
}

TrainData make_train_data(const Eigen::MatrixXd& A, const Eigen::MatrixXd& U, const Eigen::MatrixXd& Y,
                          const std::vector<Gridf>& targets, const SplitIndices& splits, bool true_y) {
    if (A.cols() != U.cols() || A.rows() != Y.cols())
        throw ConfigError("encoder map is " + std::to_string(A.rows()) + "x" + std::to_string(A.cols()) +
                          ", embeddings need " + std::to_string(Y.cols()) + "x" + std::to_string(U.cols()));
    auto inputs = [&](const std::vector<std::int64_t>& rows) -> Eigen::MatrixXd {
        if (true_y) return take_rows(Y, rows);
        return take_rows(U, rows) * A.transpose();
    };
    return {inputs(splits.train), take(targets, splits.train), inputs(splits.val), take(targets, splits.val)};
}

TrainOutcome train_model(const TrainData& data, const ExperimentConfig& cfg,
                         const std::function<void(const DecoderParams<float>&, int)>& on_best) {
    TrainOutcome out;
    if (cfg.train.deterministic) {
        auto r = train_decoder<double>(data, cfg.decoder, cfg.train, [&](const DecoderParams<double>& p, int epoch) {
            if (on_best) on_best(p.cast<float>(), epoch);
        });
        out.best = r.best.cast<float>();
        out.best_epoch = r.best_epoch;
        out.log = std::move(r.log);
        for (auto& e : out.log) e.wall_seconds = 0.0;
    } else {
        auto r = train_decoder<float>(data, cfg.decoder, cfg.train, on_best);
        out.best = std::move(r.best);
        out.best_epoch = r.best_epoch;
        out.log = std::move(r.log);
    }
    return out;
}

std::vector<Gridf> predict_maps(const Mat<float>& A, const DecoderParams<float>& params, const DecoderConfig& dcfg,
                                const Eigen::MatrixXd& U) {
    if (A.cols() != U.cols())
        throw ConfigError("encoder map expects " + std::to_string(A.cols()) + " inputs, got " + std::to_string(U.cols()));
    const Eigen::MatrixXd y = U * A.cast<double>().transpose();
    const Decoder<float> dec(dcfg);
    std::vector<Gridf> out;
    out.reserve(static_cast<std::size_t>(U.rows()));
    const Eigen::Index batch = 64;
    for (Eigen::Index begin = 0; begin < y.rows(); begin += batch) {
        const Eigen::Index count = std::min(batch, y.rows() - begin);
        for (auto& g : dec.forward(y.middleRows(begin, count).cast<float>(), params)) out.push_back(std::move(g));
    }
    return out;
}

double mean_map_baseline(const std::vector<Gridf>& train_targets, const std::vector<Gridf>& eval_targets, double lo,
                         double hi) {
    if (train_targets.empty() || eval_targets.empty()) throw ConfigError("baseline needs training and evaluation maps");
    Gridd mean = Gridd::Zero(train_targets.front().rows(), train_targets.front().cols());
    for (const auto& t : train_targets) mean += t.cast<double>();
    mean /= static_cast<double>(train_targets.size());
    double total = 0.0;
    for (const auto& t : eval_targets) total += mae_mse(mean, t.cast<double>(), lo, hi).mae;
    return total / static_cast<double>(eval_targets.size());
}

std::string epoch_log_csv(const std::vector<EpochLog>& log) {
    std::string out = "epoch,lr,train_mae,val_mae,wall_seconds\n";
    for (const auto& e : log)
        out += std::to_string(e.epoch) + "," + fmt(e.lr) + "," + fmt(e.train_mae) + "," + fmt(e.val_mae) + "," +
               fmt(e.wall_seconds) + "\n";
    return out;
}

std::string regression_csv(const FitOutcome& fit) {
    std::string out = "split,mae,mse,y_range,y_abs_mean\n";
    auto row = [&](const char* name, const RegressionReport& r) {
        out += std::string(name) + "," + fmt(r.mae) + "," + fmt(r.mse) + "," + fmt(r.y_range) + "," + fmt(r.y_abs_mean) +
               "\n";
    };
    row("train", fit.train);
    if (fit.test) row("test", *fit.test);
    return out;
}

std::string spectrum_csv(const Eigen::VectorXd& spectrum) {
    std::string out = "index,value\n";
    for (Eigen::Index i = 0; i < spectrum.size(); ++i) out += std::to_string(i + 1) + "," + fmt(spectrum(i)) + "\n";
    return out;
}

RunIdentity identity(const ExperimentConfig& cfg) { return {config_hash(cfg), cfg.seed}; }

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("missing artifact '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void write_run_record(const fs::path& dir, const std::string& command, const RunIdentity& id) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().filename() != "run.json")
            files[entry.path().filename().string()] = sha256_file(entry.path());
    json j = {{"command", command}, {"config_hash", id.config_hash}, {"seed", id.seed}, {"files", files}};
    write_text(dir / "run.json", j.dump(2) + "\n");
}

DatasetManifest run_gen(const ExperimentConfig& cfg, const fs::path& out) {
    return build_dataset(cfg.seed, cfg.dataset, out, config_hash(cfg));
}

FitOutcome run_fit(const ExperimentConfig& cfg, const fs::path& data, const fs::path& out) {
    DatasetReader reader(data);
    const auto& m = reader.manifest();
    check_dataset(cfg, m);
    const Eigen::MatrixXd U = embed_measurements(reader, cfg.phi);
    const Eigen::MatrixXd Y = embed_properties(load_targets(reader), cfg.psi, cfg.target, m.v_lo, m.v_hi);
    FitOutcome fit = fit_encoder(U, Y, m.splits, cfg.alpha);

    fs::create_directories(out);
    write_matrix(out / "A.invt", fit.map.A);
    write_matrix(out / "U.invt", U);
    write_matrix(out / "Y.invt", Y);
    write_text(out / "regression.csv", regression_csv(fit));
    const RunIdentity id = identity(cfg);
    json j = {{"config_hash", id.config_hash},
              {"seed", id.seed},
              {"dataset_config_hash", m.config_hash},
              {"dataset_seed", m.seed},
              {"alpha", fit.map.alpha},
              {"solver", fit.map.solver},
              {"column_scaling", "rms"},
              {"dims", {{"M", fit.map.A.rows()}, {"P", fit.map.A.cols()}, {"samples", U.rows()}}},
              {"phi", std::string(to_string(cfg.phi.family))},
              {"psi", std::string(to_string(cfg.psi.family))},
              {"stats",
               {{"train_mae", fit.map.stats.train_mae},
                {"train_mse", fit.map.stats.train_mse},
                {"test_mae", fit.map.stats.test_mae},
                {"test_mse", fit.map.stats.test_mse}}}};
    write_text(out / "fit.json", j.dump(2) + "\n");
    write_run_record(out, "fit", id);
    return fit;
}

namespace {

struct FitArtifacts {
    Mat<float> A;
    Eigen::MatrixXd U, Y;
};

FitArtifacts read_fit(const ExperimentConfig& cfg, const DatasetManifest& m, const fs::path& fit) {
    FitArtifacts f;
    f.A = read_matrix(fit / "A.invt").cast<float>();
    f.U = read_matrix(fit / "U.invt");
    f.Y = read_matrix(fit / "Y.invt");
    const EncoderDims dims = encoder_dims(cfg, m);
    if (f.A.rows() != dims.out || f.A.cols() != dims.in)
        throw ConfigError("fitted map is " + std::to_string(f.A.rows()) + "x" + std::to_string(f.A.cols()) +
                          " but the config implies " + std::to_string(dims.out) + "x" + std::to_string(dims.in));
    if (f.U.rows() != m.spec.n_samples || f.Y.rows() != m.spec.n_samples)
        throw ConfigError("fit embeddings do not match the dataset sample count");
    return f;
}

} // namespace

TrainOutcome run_train(const ExperimentConfig& cfg, const fs::path& data, const fs::path& fit, const fs::path& out) {
    DatasetReader reader(data);
    const auto& m = reader.manifest();
    check_dataset(cfg, m);
    const FitArtifacts f = read_fit(cfg, m, fit);
    const std::vector<Gridf> targets = load_targets(reader);
    const TrainData td = make_train_data(f.A.cast<double>(), f.U, f.Y, targets, m.splits, cfg.train_on_true_y);

    fs::create_directories(out);
    const fs::path stem = out / "model";
    const TrainOutcome r = train_model(td, cfg, [&](const DecoderParams<float>& p, int epoch) {
        save_checkpoint(stem, make_checkpoint(cfg, f.A, p, epoch));
    });
    save_checkpoint(stem, make_checkpoint(cfg, f.A, r.best, r.best_epoch));
    write_text(out / "train_log.csv", epoch_log_csv(r.log));
    const RunIdentity id = identity(cfg);
    json j = {{"config_hash", id.config_hash},
              {"seed", id.seed},
              {"precision", cfg.train.deterministic ? "float64" : "float32"},
              {"epochs", cfg.train.epochs},
              {"best_epoch", r.best_epoch},
              {"final_train_mae", r.log.empty() ? 0.0 : r.log.back().train_mae},
              {"n_params", checkpoint_numel(stem)}};
    write_text(out / "train.json", j.dump(2) + "\n");
    write_run_record(out, "train", id);
    return r;
}

Split parse_split(const std::string& name) {
    if (name == "train") return Split::Train;
    if (name == "val") return Split::Val;
    if (name == "test") return Split::Test;
    throw ConfigError("unknown split '" + name + "' (expected train, val or test)");
}

EvalReport run_eval(const ExperimentConfig& cfg, const fs::path& data, const fs::path& fit, const fs::path& checkpoint,
                    const std::optional<fs::path>& predictions, Split split, const fs::path& out) {
    DatasetReader reader(data);
    const auto& m = reader.manifest();
    check_dataset(cfg, m);
    const auto& rows = split_rows(m.splits, split);
    if (rows.empty()) throw ConfigError("the requested split is empty");
    const std::vector<Gridf> targets = load_targets(reader);

    std::vector<Gridf> pred;
    if (predictions) {
        if (!fs::exists(*predictions)) throw ConfigError("missing predictions '" + predictions->string() + "'");
        TensorReader pr(*predictions);
        const auto& d = pr.dims();
        if (d.size() != 3 || d[0] != rows.size() || d[1] != static_cast<std::uint64_t>(m.spec.map.H) ||
            d[2] != static_cast<std::uint64_t>(m.spec.map.W))
            throw ConfigError("predictions must be " + std::to_string(rows.size()) + "x" +
                              std::to_string(m.spec.map.H) + "x" + std::to_string(m.spec.map.W));
        for (std::uint64_t i = 0; i < d[0]; ++i) {
            const auto v = pr.read_slice(i);
            pred.push_back(Eigen::Map<const Gridf>(v.data(), m.spec.map.H, m.spec.map.W));
        }
    } else {
        const ModelCheckpoint ck = load_checkpoint(checkpoint);
        const FitArtifacts f = read_fit(cfg, m, fit);
        if (ck.decoder.M != cfg.decoder.M || ck.decoder.H != cfg.decoder.H || ck.decoder.W != cfg.decoder.W)
            throw ConfigError("checkpoint decoder does not match the config");
        pred = predict_maps(ck.A, ck.params, ck.decoder, take_rows(f.U, rows));
    }
    const EvalReport r = evaluate(cfg, m, pred, targets, rows);

    fs::create_directories(out);
    write_text(out / "eval.csv", r.samples_csv());
    write_text(out / "eval_summary.csv", r.summary_csv());
    const RunIdentity id = identity(cfg);
    json j = r.to_json();
    j["config_hash"] = id.config_hash;
    j["seed"] = id.seed;
    write_text(out / "eval.json", j.dump(2) + "\n");
    TensorWriter w(out / "predictions.invt", {pred.size(), static_cast<std::uint64_t>(m.spec.map.H),
                                              static_cast<std::uint64_t>(m.spec.map.W)});
    for (const auto& p : pred) w.append(std::span<const float>(p.data(), static_cast<std::size_t>(p.size())));
    w.close();
    write_run_record(out, "eval", id);
    return r;
}

Sweep parse_sweep(const std::string& name) {
    if (name == "kernels") return Sweep::Kernels;
    if (name == "counts") return Sweep::Counts;
    if (name == "arch") return Sweep::Arch;
    throw ConfigError("unknown sweep '" + name + "' (expected kernels, counts or arch)");
}

std::vector<AblationRow> run_ablate(const ExperimentConfig& cfg, const fs::path& data, Sweep sweep, const fs::path& out) {
    DatasetReader reader(data);
    const auto& m = reader.manifest();
    check_dataset(cfg, m);
    const std::vector<Gridf> targets = load_targets(reader);
    const auto& rows = holdout(m.splits);
    if (rows.empty()) throw ConfigError("ablation needs a test or validation split");

    std::map<std::string, Eigen::MatrixXd> u_cache, y_cache;
    auto u_for = [&](const PhiSpec& phi) -> const Eigen::MatrixXd& {
        const std::string key = std::string(to_string(phi.family)) + "/" + std::to_string(phi.N);
        auto it = u_cache.find(key);
        if (it == u_cache.end()) it = u_cache.emplace(key, embed_measurements(reader, phi)).first;
        return it->second;
    };
    auto y_for = [&](const ExperimentConfig& c) -> const Eigen::MatrixXd& {
        const std::string key = std::string(to_string(c.psi.family)) + "/" + std::to_string(c.psi.M);
        auto it = y_cache.find(key);
        if (it == y_cache.end())
            it = y_cache.emplace(key, embed_properties(targets, c.psi, c.target, m.v_lo, m.v_hi)).first;
        return it->second;
    };
    auto run_variant = [&](const std::string& table, const std::string& variant, ExperimentConfig c) {
        c.finalize();
        std::cerr << "[ablate] " << table << " " << variant << "\n";
        const Eigen::MatrixXd& U = u_for(c.phi);
        const Eigen::MatrixXd& Y = y_for(c);
        const FitOutcome fit = fit_encoder(U, Y, m.splits, c.alpha);
        const Mat<float> A = fit.map.A.cast<float>();
        const TrainData td = make_train_data(A.cast<double>(), U, Y, targets, m.splits, c.train_on_true_y);
        const TrainOutcome tr = train_model(td, c);
        const auto pred = predict_maps(A, tr.best, c.decoder, take_rows(U, rows));
        return AblationRow{table, variant, evaluate(c, m, pred, targets, rows)};
    };

    std::vector<AblationRow> result;
    switch (sweep) {
    case Sweep::Kernels:
        for (const PhiFamily f : phi_menu()) {
            ExperimentConfig c = cfg;
            c.phi.family = f;
            result.push_back(run_variant("encoder", std::string(to_string(f)), c));
        }
        for (const PsiFamily f : psi_menu()) {
            ExperimentConfig c = cfg;
            c.psi.family = f;
            result.push_back(run_variant("decoder", std::string(to_string(f)), c));
        }
        break;
    case Sweep::Counts: {
        for (const int n : {std::max(1, cfg.phi.N / 4), std::max(1, cfg.phi.N / 2), cfg.phi.N}) {
            ExperimentConfig c = cfg;
            c.phi.N = n;
            result.push_back(run_variant("counts", "N=" + std::to_string(n), c));
        }
        const int side = cfg.psi.centers_x() == cfg.psi.centers_z() ? cfg.psi.centers_x() : 0;
        if (side > 0) {
            for (const int s : {std::max(1, side / 3), std::max(1, 2 * side / 3), side}) {
                ExperimentConfig c = cfg;
                c.psi.M = s * s;
                c.psi.m_x = c.psi.m_z = 0;
                result.push_back(run_variant("counts", "M=" + std::to_string(s * s), c));
            }
        }
        break;
    }
    case Sweep::Arch: {
        ExperimentConfig shared = cfg, multi = cfg, deep = cfg;
        shared.decoder.shared_final = true;
        multi.decoder.shared_final = false;
        deep.decoder.depth = cfg.decoder.depth + 1;
        result.push_back(run_variant("arch", "shared_final", shared));
        result.push_back(run_variant("arch", "multi_linear_final", multi));
        result.push_back(run_variant("arch", "depth=" + std::to_string(deep.decoder.depth), deep));
        break;
    }
    }

    fs::create_directories(out);
    write_text(out / "ablation.csv", ablation_csv(result));
    write_run_record(out, "ablate", identity(cfg));
    return result;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
    std::string out = "table,variant,mae,mse,ssim,n_params,flops\n";
    for (const auto& r : rows)
        out += r.table + "," + r.variant + "," + fmt(r.report.mae) + "," + fmt(r.report.mse) + "," + fmt(r.report.ssim) +
               "," + std::to_string(r.report.n_params) + "," + std::to_string(r.report.flops) + "\n";
    return out;
}

} // namespace invlint
