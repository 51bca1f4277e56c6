#include "invlint/cli.hpp"

#include "invlint/parallel.hpp"
#include "invlint/pipeline.hpp"
#include "invlint/tensor_io.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace invlint {

namespace fs = std::filesystem;

namespace {

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    bool deterministic = false;
};

ExperimentConfig resolve_config(const Globals& g) {
    ExperimentConfig cfg;
    if (!g.config.empty()) {
        if (!fs::exists(g.config)) throw ConfigError("config file '" + g.config + "' does not exist");
        cfg = load_config(g.config);
    } else {
        cfg.finalize();
    }
    if (g.seed) cfg.seed = *g.seed;
    cfg.train.seed = cfg.seed;
    if (g.deterministic) cfg.train.deterministic = true;
    return cfg;
}

fs::path or_default(const std::string& flag, const std::string& fallback) { return flag.empty() ? fallback : flag; }

int cmd_simulate(const ExperimentConfig& cfg, const std::string& velocity, std::int64_t index, const fs::path& out) {
    VelocityMap map;
    if (!velocity.empty()) {
        if (!fs::exists(velocity)) throw ConfigError("missing velocity file '" + velocity + "'");
        const Tensor t = read_tensor(velocity);
        if (t.dims.size() != 2) throw ConfigError("velocity file must hold an H x W tensor");
        map.v = Eigen::Map<const Gridf>(t.data.data(), static_cast<Eigen::Index>(t.dims[0]),
                                        static_cast<Eigen::Index>(t.dims[1]));
        map.dx = cfg.dataset.map.dx;
        map.dz = cfg.dataset.map.dz;
    } else {
        map = gen_velocity_map(sample_seed(cfg.seed, index), cfg.dataset.map);
    }
    map.validate();
    MapSpec geometry = cfg.dataset.map;
    geometry.H = static_cast<int>(map.rows());
    geometry.W = static_cast<int>(map.cols());
    cfg.dataset.acquisition.validate(geometry);
    geometry.v_max = std::max<double>(geometry.v_max, map.v.maxCoeff());
    const ShotGather g = simulate_gather(map, cfg.dataset.acquisition.sources(geometry),
                                         cfg.dataset.acquisition.receivers(geometry), cfg.dataset.sim.resolve(geometry));

    fs::create_directories(out);
    const std::vector<std::uint64_t> vdims{static_cast<std::uint64_t>(map.rows()), static_cast<std::uint64_t>(map.cols())};
    write_tensor(out / "velocity.invt", vdims, std::span<const float>(map.v.data(), static_cast<std::size_t>(map.v.size())));
    TensorWriter w(out / "gather.invt", {static_cast<std::uint64_t>(g.sources()), static_cast<std::uint64_t>(g.samples()),
                                         static_cast<std::uint64_t>(g.receivers())});
    for (const auto& tr : g.traces) w.append(std::span<const float>(tr.data(), static_cast<std::size_t>(tr.size())));
    w.close();
    const RunIdentity id = identity(cfg);
    const nlohmann::json j = {{"config_hash", id.config_hash}, {"seed", id.seed}, {"dt", g.dt},
                              {"dims", {{"S", g.sources()}, {"T", g.samples()}, {"R", g.receivers()}}}};
    write_text(out / "simulate.json", j.dump(2) + "\n");
    write_run_record(out, "simulate", id);
    return kExitOk;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"InvLINT: integral-transform encoder, linear map and transformer decoder for velocity inversion"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "experiment config (JSON)");
    app.add_option("--seed", g.seed, "override the config seed");
    app.add_option("--threads", g.threads, "worker thread cap (0 = all cores)");
    app.add_flag("--deterministic", g.deterministic, "64-bit training with bitwise reproducible outputs");

    std::string out, data, fit, checkpoint, predictions, map, velocity, split = "test", sweep = "kernels";
    std::int64_t index = 0;
    Eigen::Index truncate = 150;

    auto* gen = app.add_subcommand("gen", "simulate a dataset");
    gen->add_option("--out", out, "dataset directory");
    auto* simulate = app.add_subcommand("simulate", "simulate one shot gather");
    simulate->add_option("--out", out, "output directory")->required();
    simulate->add_option("--velocity", velocity, "H x W velocity tensor (INVT); default: generated map");
    simulate->add_option("--index", index, "sample index used to seed the generated map");
    auto* fitc = app.add_subcommand("fit", "fit the linear encoder map");
    fitc->add_option("--data", data, "dataset directory");
    fitc->add_option("--out", out, "output directory");
    auto* train = app.add_subcommand("train", "train the decoder");
    train->add_option("--data", data, "dataset directory");
    train->add_option("--fit", fit, "fit directory");
    train->add_option("--out", out, "output directory");
    auto* eval = app.add_subcommand("eval", "score a trained model");
    eval->add_option("--data", data, "dataset directory");
    eval->add_option("--fit", fit, "fit directory");
    eval->add_option("--checkpoint", checkpoint, "checkpoint stem (default: <train>/model)");
    eval->add_option("--predictions", predictions, "score these normalised maps (INVT, split x H x W) instead");
    eval->add_option("--split", split, "train, val or test");
    eval->add_option("--out", out, "output directory");
    auto* svd = app.add_subcommand("svd", "singular value spectrum of the encoder map");
    svd->add_option("--fit", fit, "fit directory holding A.invt");
    svd->add_option("--map", map, "explicit matrix (INVT) instead of the fit directory");
    svd->add_option("--truncate", truncate, "number of singular values kept");
    svd->add_option("--out", out, "output CSV (default: <fit>/spectrum.csv)");
    auto* ablate = app.add_subcommand("ablate", "kernel / count / architecture sweeps");
    ablate->add_option("--data", data, "dataset directory");
    ablate->add_option("--sweep", sweep, "kernels, counts or arch");
    ablate->add_option("--out", out, "output directory");
    app.fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (g.threads) thread_cap() = *g.threads;
        const ExperimentConfig cfg = resolve_config(g);
        const auto& p = cfg.paths;
        if (gen->parsed()) {
            const auto m = run_gen(cfg, or_default(out, p.data));
            std::cout << "wrote " << m.spec.n_samples << " samples to " << or_default(out, p.data).string() << "\n";
        } else if (simulate->parsed()) {
            return cmd_simulate(cfg, velocity, index, out);
        } else if (fitc->parsed()) {
            const auto r = run_fit(cfg, or_default(data, p.data), or_default(out, p.fit));
            std::cout << regression_csv(r);
        } else if (train->parsed()) {
            const auto r = run_train(cfg, or_default(data, p.data), or_default(fit, p.fit), or_default(out, p.train));
            std::cout << "best epoch " << r.best_epoch << "\n";
        } else if (eval->parsed()) {
            std::optional<fs::path> pred;
            if (!predictions.empty()) pred = predictions;
            const fs::path ck = checkpoint.empty() ? fs::path(p.train) / "model" : fs::path(checkpoint);
            const auto r = run_eval(cfg, or_default(data, p.data), or_default(fit, p.fit), ck, pred, parse_split(split),
                                    or_default(out, p.eval));
            std::cout << r.summary_csv();
        } else if (svd->parsed()) {
            const fs::path src = map.empty() ? or_default(fit, p.fit) / "A.invt" : fs::path(map);
            if (!fs::exists(src)) throw ConfigError("missing matrix '" + src.string() + "'");
            const Tensor t = read_tensor(src);
            if (t.dims.size() != 2) throw ConfigError("'" + src.string() + "' is not a matrix");
            const Eigen::MatrixXd A =
                Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                    t.data.data(), static_cast<Eigen::Index>(t.dims[0]), static_cast<Eigen::Index>(t.dims[1]))
                    .cast<double>();
            const std::string csv = spectrum_csv(svd_spectrum(A, truncate));
            const fs::path dest = out.empty() ? src.parent_path() / "spectrum.csv" : fs::path(out);
            if (dest.has_parent_path()) fs::create_directories(dest.parent_path());
            write_text(dest, csv);
            std::cout << csv;
        } else if (ablate->parsed()) {
            const auto rows = run_ablate(cfg, or_default(data, p.data), parse_sweep(sweep), or_default(out, "ablation"));
            std::cout << ablation_csv(rows);
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

} // namespace invlint
