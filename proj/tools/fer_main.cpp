// fer: train and evaluate the coherence-constrained expression classifier
// pool on synthetic or user-supplied landmark-annotated corpora.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "fer/error.hpp"
#include "fer/evaluation.hpp"
#include "fer/run_config.hpp"
#include "fer/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fer;

namespace {

// ---------------------------------------------------------------------------
// Flag <-> config-key binding. Every flag mirrors one RunConfig field whose
// config-file key is the flag name with dashes turned into underscores;
// file values apply first, supplied flags override.
// ---------------------------------------------------------------------------
class Binder {
public:
    explicit Binder(CLI::App* cmd) : cmd_(cmd) {
        cmd->add_option("--config", config_path_, "JSON config file (flags override its values)");
    }

    template <typename T>
    void bind(const std::string& key, T RunConfig::*member, const std::string& help) {
        const std::string flag = "--" + dashed(key);
        auto* opt = cmd_->add_option(flag, flags_.*member, help);
        overlays_.emplace_back(opt, [member](RunConfig& dst, const RunConfig& src) {
            dst.*member = src.*member;
        });
    }

    RunConfig resolve() const {
        RunConfig cfg;
        if (!config_path_.empty()) {
            std::ifstream f(config_path_);
            if (!f) throw config_error("cannot open config file '" + config_path_ + "'");
            std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
            cfg.apply_json_text(text);
        }
        for (const auto& [opt, copy] : overlays_)
            if (opt->count() > 0) copy(cfg, flags_);
        cfg.validate();
        return cfg;
    }

private:
    static std::string dashed(std::string key) {
        for (auto& c : key)
            if (c == '_') c = '-';
        return key;
    }

    CLI::App* cmd_;
    std::string config_path_;
    RunConfig flags_;
    std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&, const RunConfig&)>>> overlays_;
};

void bind_data(Binder& b) {
    b.bind("manifest", &RunConfig::manifest, "JSON-lines corpus manifest");
    b.bind("alpha", &RunConfig::alpha, "neutral-head fraction (0,beta)");
    b.bind("beta", &RunConfig::beta, "labeled-tail threshold (alpha,1)");
    b.bind("seed", &RunConfig::seed, "run-level seed (init, split, batches)");
    b.bind("train_frac", &RunConfig::train_frac, "train split fraction");
    b.bind("val_frac", &RunConfig::val_frac, "validation split fraction");
    b.bind("test_frac", &RunConfig::test_frac, "test split fraction");
    b.bind("out", &RunConfig::out, "output directory (under $FER_OUT_ROOT if relative)");
    b.bind("threads", &RunConfig::threads, "compute threads (results identical for any value)");
}

void bind_training(Binder& b) {
    b.bind("lambda_t", &RunConfig::lambda_t, "temporal-coherence weight");
    b.bind("lambda_c", &RunConfig::lambda_c, "part-coherence weight");
    b.bind("lambda_r", &RunConfig::lambda_r, "appearance-shape coherence weight");
    b.bind("lr", &RunConfig::lr, "Adam learning rate");
    b.bind("batch", &RunConfig::batch, "batch size in frames (even; 48 adjacent pairs at 96)");
    b.bind("patience", &RunConfig::patience, "early-stopping patience in epochs");
    b.bind("max_epochs", &RunConfig::max_epochs, "epoch cap");
    b.bind("warmup", &RunConfig::warmup, "supervised warmup epochs (lambdas forced to 0)");
    b.bind("normalization", &RunConfig::normalization, "'per-batch' or 'raw-sum' term scaling");
    b.bind("networks", &RunConfig::networks, "networks to train (default: all 15)");
    b.bind("monitor", &RunConfig::monitor, "validation classifier (e.g. face_app)");
}

json config_echo(const RunConfig& cfg) {
    return json{{"manifest", cfg.manifest},
                {"alpha", cfg.alpha},
                {"beta", cfg.beta},
                {"seed", cfg.seed},
                {"lambda_t", cfg.lambda_t},
                {"lambda_c", cfg.lambda_c},
                {"lambda_r", cfg.lambda_r},
                {"lr", cfg.lr},
                {"batch", cfg.batch},
                {"patience", cfg.patience},
                {"max_epochs", cfg.max_epochs},
                {"warmup", cfg.warmup},
                {"normalization", cfg.normalization},
                {"networks", cfg.networks},
                {"monitor", cfg.monitor},
                {"threads", cfg.threads}};
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw data_error("cannot write '" + path.string() + "'");
    f << j.dump(2) << "\n";
}

struct LoadedData {
    SemiSupervisedDataset dataset;
    SplitResult split;
};

LoadedData load_data(const RunConfig& cfg) {
    if (cfg.manifest.empty()) throw config_error("--manifest is required");
    auto videos = load_manifest(cfg.manifest);
    LoadedData data;
    data.dataset = build_semisupervised_dataset(std::move(videos), cfg.alpha, cfg.beta);
    data.split = split_dataset(data.dataset.sequences, cfg.split_config());
    for (const auto& w : data.split.warnings) std::cerr << "warning: " << w << "\n";
    return data;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_synth(const RunConfig& cfg) {
    const auto dir = cfg.out_dir();
    fs::create_directories(dir);
    const auto corpus = generate_synthetic_corpus(cfg.synthetic_config());
    const auto manifest = write_corpus(dir, corpus);
    std::size_t frames = 0;
    for (const auto& v : corpus) frames += v.frames.size();
    std::cout << "wrote " << corpus.size() << " videos / " << frames << " frames\n"
              << "manifest: " << manifest.string() << "\n";
    return 0;
}

int cmd_train(const RunConfig& cfg) {
    const auto dir = cfg.out_dir();
    fs::create_directories(dir);
    auto data = load_data(cfg);

    ModelPool pool = ModelPool::create(cfg.seed);
    const TrainResult result = train(pool, data.dataset, data.split, cfg.train_config());

    pool.save(dir / "checkpoint.fpc");
    write_train_log_csv(dir / "train_log.csv", result.log);
    json summary{{"best_epoch", result.best_epoch},
                 {"best_val_micro", result.best_val_micro},
                 {"epochs_run", result.epochs_run},
                 {"aborted", result.aborted},
                 {"abort_reason", result.abort_reason},
                 {"val_micro_per_epoch", result.val_micro_per_epoch},
                 {"videos", data.dataset.sequences.size()},
                 {"train_videos", data.split.train.size()},
                 {"config", config_echo(cfg)}};
    write_json(dir / "summary.json", summary);

    if (result.aborted) {
        std::cerr << "error[numeric]: training aborted: " << result.abort_reason
                  << " (last-good checkpoint saved)\n";
        return 4;
    }
    std::cout << "best epoch " << result.best_epoch << ", validation micro "
              << result.best_val_micro << "%\n"
              << "checkpoint: " << (dir / "checkpoint.fpc").string() << "\n";
    return 0;
}

int cmd_grid(const RunConfig& cfg) {
    const auto dir = cfg.out_dir();
    fs::create_directories(dir);
    auto data = load_data(cfg);

    const GridResult result = grid_search(data.dataset, data.split, cfg.grid_spec(), cfg.train_config());
    write_grid_csv(dir / "grid_results.csv", result);
    write_grid_svg(dir / "grid_results.svg", result);

    json cells = json::array();
    for (const auto& cell : result.cells)
        cells.push_back({{"lambda_t", cell.lambdas.lambda_t},
                         {"lambda_c", cell.lambdas.lambda_c},
                         {"lambda_r", cell.lambdas.lambda_r},
                         {"val_micro", cell.val_micro},
                         {"val_macro", cell.val_macro},
                         {"best_epoch", cell.best_epoch},
                         {"failed", cell.failed},
                         {"error", cell.error}});
    json summary{{"cells", cells},
                 {"best_micro_cell", result.best_micro},
                 {"best_macro_cell", result.best_macro},
                 {"config", config_echo(cfg)}};
    write_json(dir / "summary.json", summary);

    if (result.best_micro < 0) {
        std::cerr << "error[numeric]: every grid cell failed\n";
        return 4;
    }
    const auto& best = result.cells[static_cast<std::size_t>(result.best_micro)];
    std::cout << "best micro cell: lambda_t=" << best.lambdas.lambda_t
              << " lambda_c=" << best.lambdas.lambda_c << " lambda_r=" << best.lambdas.lambda_r
              << " -> " << best.val_micro << "%\n";
    return 0;
}

void write_metric_table(const fs::path& path, const AggregateReport& agg,
                        const std::vector<std::string>& row_names) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw data_error("cannot write '" + path.string() + "'");
    f << "classifier,image_micro,image_micro_std,image_macro,image_macro_std,"
         "video_micro,video_micro_std,video_macro,video_macro_std\n";
    f.precision(10);
    for (const auto& [name, cells] : agg.rows) {
        if (std::find(row_names.begin(), row_names.end(), name) == row_names.end()) continue;
        f << name;
        for (const auto& cell : cells) f << "," << cell.mean << "," << cell.stddev;
        f << "\n";
    }
}

int cmd_eval(const RunConfig& cfg) {
    if (cfg.checkpoints.empty()) throw config_error("--checkpoints requires at least one file");
    const auto dir = cfg.out_dir();
    fs::create_directories(dir);
    set_compute_threads(cfg.threads);

    if (cfg.manifest.empty()) throw config_error("--manifest is required");
    auto videos = load_manifest(cfg.manifest);
    auto dataset = build_semisupervised_dataset(std::move(videos), cfg.alpha, cfg.beta);

    std::vector<EvalReport> reports;
    json per_checkpoint = json::array();
    for (const auto& ckpt : cfg.checkpoints) {
        ModelPool pool = ModelPool::load(ckpt);
        // Evaluate on the test partition of the split this pool was trained
        // under (the split seed is stored in the checkpoint).
        SplitConfig split_cfg = cfg.split_config();
        split_cfg.seed = pool.seed();
        const SplitResult split = split_dataset(dataset.sequences, split_cfg);
        reports.push_back(evaluate(pool, dataset, split.test));

        json rows = json::array();
        for (const auto& [name, m] : reports.back().rows) {
            rows.push_back({{"classifier", name},
                            {"image_micro", m.image_micro},
                            {"image_macro", m.image_macro},
                            {"video_micro", m.video_micro},
                            {"video_macro", m.video_macro},
                            {"per_class_image", m.per_class_image},
                            {"per_class_video", m.per_class_video},
                            {"image_n", m.image_n},
                            {"video_n", m.video_n}});
        }
        per_checkpoint.push_back({{"checkpoint", ckpt}, {"seed", ModelPool::load(ckpt).seed()}, {"rows", rows}});
    }

    const AggregateReport agg = aggregate_reports(reports);
    write_metric_table(dir / "table1.csv", agg, {"face_app", "face_shape", "avg_all"});
    std::vector<std::string> part_rows;
    for (const RepId id : all_representations())
        if (id.part != Part::Face) part_rows.push_back(rep_name(id));
    write_metric_table(dir / "table2.csv", agg, part_rows);

    {  // per-class table (mean over checkpoints) for face_app and mouth_app
        std::ofstream f(dir / "table3.csv", std::ios::trunc);
        f << "classifier,level,anger,disgust,fear,happiness,sadness,surprise,neutral\n";
        f.precision(10);
        for (const std::string name : {"face_app", "mouth_app"}) {
            for (int level = 0; level < 2; ++level) {
                f << name << "," << (level == 0 ? "images" : "videos");
                for (int c = 0; c < 7; ++c) {
                    if (level == 1 && c == 6) {
                        f << ",--";  // no neutral-labeled videos
                        continue;
                    }
                    double mean = 0.0;
                    int n = 0;
                    for (const auto& report : reports) {
                        const auto& m = report.row(name);
                        const double v = level == 0 ? m.per_class_image[static_cast<std::size_t>(c)]
                                                    : m.per_class_video[static_cast<std::size_t>(c)];
                        if (v >= 0.0) {
                            mean += v;
                            ++n;
                        }
                    }
                    if (n == 0) f << ",--";
                    else f << "," << mean / n;
                }
                f << "\n";
            }
        }
    }

    if (cfg.checkpoints.size() > 1) {  // side-by-side model comparison
        std::ofstream f(dir / "table4.csv", std::ios::trunc);
        f << "checkpoint,classifier,image_micro,image_macro,video_micro,video_macro\n";
        f.precision(10);
        for (std::size_t i = 0; i < reports.size(); ++i) {
            const auto& m = reports[i].row(cfg.classifier);
            f << fs::path(cfg.checkpoints[i]).stem().string() << "," << cfg.classifier << ","
              << m.image_micro << "," << m.image_macro << "," << m.video_micro << ","
              << m.video_macro << "\n";
        }
    }

    write_json(dir / "summary.json",
               json{{"checkpoints", per_checkpoint}, {"config", config_echo(cfg)}});
    const auto& face = agg.rows[0].second;
    std::cout << "face_app image micro " << face[0].mean << "% (std " << face[0].stddev
              << "), video micro " << face[2].mean << "%\n"
              << "tables: " << (dir / "table1.csv").string() << " ...\n";
    return 0;
}

int cmd_occlude(const RunConfig& cfg) {
    if (cfg.checkpoints.size() != 1) throw config_error("occlude needs exactly one --checkpoints entry");
    const auto dir = cfg.out_dir();
    fs::create_directories(dir);
    set_compute_threads(cfg.threads);

    if (cfg.manifest.empty()) throw config_error("--manifest is required");
    auto videos = load_manifest(cfg.manifest);
    auto dataset = build_semisupervisedDataset_or_throw:
    ;
    return 0;
}

int cmd_timeline(const RunConfig& cfg) {
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    return 0;
}
