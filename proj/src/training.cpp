#include "fer/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "fer/adam.hpp"
#include "fer/error.hpp"
#include "fer/evaluation.hpp"
#include "fer/rng.hpp"
#include "fer/svg.hpp"

namespace fer {

std::vector<Batch> make_batches(const SemiSupervisedDataset& ds, const std::vector<int>& videos,
                                int batch_size, std::uint64_t seed) {
    if (batch_size < 2 || batch_size % 2 != 0)
        throw config_error("batch size must be even and >= 2 (batches are adjacent-frame pairs)");

    struct PairRef {
        int video;
        int t0;  // 0-based index of the earlier frame
    };
    std::vector<PairRef> pairs;
    std::vector<int> singletons;  // video indices of length-1 sequences
    for (const int vi : videos) {
        const auto& video = ds.sequences[static_cast<std::size_t>(vi)];
        if (video.frames.size() == 1) {
            singletons.push_back(vi);
            continue;
        }
        for (int t0 = 0; t0 + 1 < static_cast<int>(video.frames.size()); ++t0)
            pairs.push_back({vi, t0});
    }

    Rng rng(seed);
    rng.shuffle(pairs);
    rng.shuffle(singletons);

    const int pairs_per_batch = batch_size / 2;
    std::vector<Batch> batches;
    for (std::size_t i = 0; i < pairs.size(); i += static_cast<std::size_t>(pairs_per_batch)) {
        Batch batch;
        const std::size_t end = std::min(pairs.size(), i + static_cast<std::size_t>(pairs_per_batch));
        for (std::size_t j = i; j < end; ++j) {
            const auto& video = ds.sequences[static_cast<std::size_t>(pairs[j].video)];
            BatchGroup group;
            group.frames.push_back(make_batch_frame(video.frames[static_cast<std::size_t>(pairs[j].t0)]));
            group.frames.push_back(make_batch_frame(video.frames[static_cast<std::size_t>(pairs[j].t0 + 1)]));
            batch.groups.push_back(std::move(group));
        }
        batches.push_back(std::move(batch));
    }
    if (batches.empty() && !singletons.empty()) batches.emplace_back();

    // Singletons fill residual frame capacity, overflowing into new batches.
    std::size_t b = batches.empty() ? 0 : batches.size() - 1;
    for (const int vi : singletons) {
        auto frames_in = [](const Batch& batch) {
            std::size_t n = 0;
            for (const auto& g : batch.groups) n += g.frames.size();
            return n;
        };
        if (frames_in(batches[b]) + 1 > static_cast<std::size_t>(batch_size)) {
            batches.emplace_back();
            b = batches.size() - 1;
        }
        BatchGroup group;
        group.frames.push_back(
            make_batch_frame(ds.sequences[static_cast<std::size_t>(vi)].frames.front()));
        batches[b].groups.push_back(std::move(group));
    }
    return batches;
}

namespace {

void collect_labeled(const SemiSupervisedDataset& ds, const std::vector<int>& videos, RepId rep,
                     const ModelPool& pool, std::vector<int>& pred, std::vector<int>& truth) {
    for (const int vi : videos) {
        for (const auto& frame : ds.sequences[static_cast<std::size_t>(vi)].frames) {
            if (frame.label == Label::none) continue;
            const ImageF img = to_float(frame.pixels);
            pred.push_back(predict_frame(pool, rep, img, frame.landmarks));
            truth.push_back(label_index(frame.label));
        }
    }
}

}  // namespace

double labeled_frame_micro(const ModelPool& pool, RepId rep, const SemiSupervisedDataset& ds,
                           const std::vector<int>& videos) {
    std::vector<int> pred, truth;
    collect_labeled(ds, videos, rep, pool, pred, truth);
    return micro_accuracy(pred, truth);
}

double labeled_frame_macro(const ModelPool& pool, RepId rep, const SemiSupervisedDataset& ds,
                           const std::vector<int>& videos) {
    std::vector<int> pred, truth;
    collect_labeled(ds, videos, rep, pool, pred, truth);
    return macro_accuracy(pred, truth);
}

TrainResult train(ModelPool& pool, const SemiSupervisedDataset& ds, const SplitResult& split,
                  const TrainConfig& config) {
    if (config.lr <= 0) throw config_error("learning rate must be positive");
    if (config.max_epochs < 1) throw config_error("max_epochs must be >= 1");
    if (config.patience < 1) throw config_error("patience must be >= 1");
    set_compute_threads(config.threads);

    const ActiveSet active =
        config.active.empty() ? ActiveSet::all() : ActiveSet::of(config.active);
    if (!active.has(config.monitor))
        throw config_error("monitor classifier " + rep_name(config.monitor) +
                           " is not among the trained networks");

    auto params = pool.parameters(active.reps());
    for (auto* p : params) p->tensor->ensure_grad();

    AdamConfig adam_cfg;
    adam_cfg.lr = config.lr;
    AdamOptimizer optimizer(adam_cfg);

    TrainResult result;
    auto snapshot = [&] {
        std::vector<std::vector<double>> values;
        values.reserve(params.size());
        for (auto* p : params) values.push_back(p->tensor->values);
        return values;
    };
    auto restore = [&](const std::vector<std::vector<double>>& values) {
        for (std::size_t i = 0; i < params.size(); ++i) params[i]->tensor->values = values[i];
    };
    std::vector<std::vector<double>> best = snapshot();
    double best_metric = -1.0;
    int epochs_since_best = 0;
    int step = 0;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        const LossWeights lambdas =
            epoch <= config.supervised_warmup_epochs ? LossWeights{} : config.lambdas;
        PoolLossComputer computer(pool, lambdas, config.norm, active);

        const auto batches = make_batches(ds, split.train, config.batch_size,
                                          derive_seed(config.seed, 200 + static_cast<std::uint64_t>(epoch)));
        for (const Batch& batch : batches) {
            for (auto* p : params) p->tensor->zero_grad();
            const LossBreakdown loss = computer.backward_accumulate(batch);
            if (!std::isfinite(loss.total)) {
                restore(best);
                result.aborted = true;
                result.abort_reason = "non-finite loss at step " + std::to_string(step + 1);
                result.epochs_run = epoch;
                return result;
            }
            try {
                optimizer.step(params);
            } catch (const Error& e) {
                restore(best);
                result.aborted = true;
                result.abort_reason = e.what();
                result.epochs_run = epoch;
                return result;
            }
            ++step;
            result.log.push_back({step, epoch, loss, lambdas});
        }

        const double val = labeled_frame_micro(pool, config.monitor, ds, split.validation);
        result.val_micro_per_epoch.push_back(val);
        result.epochs_run = epoch;
        if (val > best_metric) {
            best_metric = val;
            result.best_epoch = epoch;
            best = snapshot();
            epochs_since_best = 0;
        } else {
            ++epochs_since_best;
        }
        if (epochs_since_best >= config.patience) break;
    }

    restore(best);
    result.best_val_micro = best_metric;
    return result;
}

void write_train_log_csv(const std::filesystem::path& path, const std::vector<TrainLogRow>& log) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw data_error("cannot write training log '" + path.string() + "'");
    f << "step,epoch";
    for (int t = 0; t < kTermCount; ++t) f << "," << term_name(t);
    f << ",total,lambda_t,lambda_c,lambda_r\n";
    f.precision(12);
    for (const auto& row : log) {
        f << row.step << "," << row.epoch;
        for (int t = 0; t < kTermCount; ++t) f << "," << row.loss.terms[static_cast<std::size_t>(t)];
        f << "," << row.loss.total << "," << row.lambdas.lambda_t << "," << row.lambdas.lambda_c
          << "," << row.lambdas.lambda_r << "\n";
    }
}

GridResult grid_search(const SemiSupervisedDataset& ds, const SplitResult& split,
                       const GridSpec& grid, const TrainConfig& base) {
    if (grid.axes.empty() || grid.axes.size() > 2)
        throw config_error("grid search varies one or two lambda axes");
    for (char a : grid.axes)
        if (a != 't' && a != 'c' && a != 'r')
            throw config_error(std::string("unknown grid axis '") + a + "' (use t, c, r)");
    if (grid.values.empty()) throw config_error("grid value list is empty");

    auto cell_lambdas = [&](std::size_t i, std::size_t j) {
        LossWeights w;
        auto assign = [&](char axis, double value) {
            if (axis == 't') w.lambda_t = value;
            if (axis == 'c') w.lambda_c = value;
            if (axis == 'r') w.lambda_r = value;
        };
        assign(grid.axes[0], grid.values[i]);
        if (grid.axes.size() == 2) assign(grid.axes[1], grid.values[j]);
        return w;
    };

    GridResult result;
    const std::size_t n2 = grid.axes.size() == 2 ? grid.values.size() : 1;
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
        for (std::size_t j = 0; j < n2; ++j) {
            GridCell cell;
            cell.lambdas = cell_lambdas(i, j);
            try {
                // Cells share initial weights: identical re-seeding per cell.
                ModelPool pool = ModelPool::create(base.seed);
                TrainConfig cfg = base;
                cfg.lambdas = cell.lambdas;
                const TrainResult tr = train(pool, ds, split, cfg);
                if (tr.aborted) throw numeric_error(tr.abort_reason);
                cell.val_micro = tr.best_val_micro;
                cell.val_macro = labeled_frame_macro(pool, cfg.monitor, ds, split.validation);
                cell.best_epoch = tr.best_epoch;
            } catch (const std::exception& e) {
                cell.failed = true;
                cell.error = e.what();
            }
            result.cells.push_back(std::move(cell));
        }
    }

    for (std::size_t i = 0; i < result.cells.size(); ++i) {
        const auto& cell = result.cells[i];
        if (cell.failed) continue;
        if (result.best_micro < 0 ||
            cell.val_micro > result.cells[static_cast<std::size_t>(result.best_micro)].val_micro)
            result.best_micro = static_cast<int>(i);
        if (result.best_macro < 0 ||
            cell.val_macro > result.cells[static_cast<std::size_t>(result.best_macro)].val_macro)
            result.best_macro = static_cast<int>(i);
    }
    return result;
}

void write_grid_csv(const std::filesystem::path& path, const GridResult& result) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw data_error("cannot write grid results '" + path.string() + "'");
    f << "lambda_t,lambda_c,lambda_r,val_micro,val_macro,best_epoch,status\n";
    f.precision(12);
    for (const auto& cell : result.cells) {
        f << cell.lambdas.lambda_t << "," << cell.lambdas.lambda_c << "," << cell.lambdas.lambda_r
          << "," << cell.val_micro << "," << cell.val_macro << "," << cell.best_epoch << ","
          << (cell.failed ? "failed: " + cell.error : std::string("ok")) << "\n";
    }
}

void write_grid_svg(const std::filesystem::path& path, const GridResult& result) {
    const int n = static_cast<int>(result.cells.size());
    const int bar_w = 34, gap = 26, left = 60, top = 20, plot_h = 220;
    SvgDoc svg(left + n * (2 * bar_w + gap) + 40, top + plot_h + 70);

    for (int grid_line = 0; grid_line <= 100; grid_line += 25) {
        const double y = top + plot_h * (1.0 - grid_line / 100.0);
        svg.line(left - 6, y, left + n * (2 * bar_w + gap), y, "#cccccc", 0.6);
        svg.text(left - 10, y + 4, std::to_string(grid_line), 10, "end");
    }
    for (int i = 0; i < n; ++i) {
        const auto& cell = result.cells[static_cast<std::size_t>(i)];
        const double x = left + i * (2 * bar_w + gap);
        if (!cell.failed) {
            const double micro_h = plot_h * cell.val_micro / 100.0;
            const double macro_h = plot_h * cell.val_macro / 100.0;
            const bool best_micro = i == result.best_micro;
            const bool best_macro = i == result.best_macro;
            svg.rect(x, top + plot_h - micro_h, bar_w, micro_h, "#1f77b4",
                     best_micro ? "#000000" : "", best_micro ? 2.0 : 0.0);
            svg.rect(x + bar_w + 2, top + plot_h - macro_h, bar_w, macro_h, "#ff7f0e",
                     best_macro ? "#000000" : "", best_macro ? 2.0 : 0.0);
        } else {
            svg.text(x, top + plot_h - 6, "failed", 10);
        }
        std::ostringstream label;
        label.precision(1);
        label << std::scientific;
        if (cell.lambdas.lambda_t > 0) label << "t=" << cell.lambdas.lambda_t << " ";
        if (cell.lambdas.lambda_c > 0) label << "c=" << cell.lambdas.lambda_c << " ";
        if (cell.lambdas.lambda_r > 0) label << "r=" << cell.lambdas.lambda_r;
        if (label.str().empty()) label << "0";
        svg.text(x, top + plot_h + 16, label.str(), 9);
    }
    svg.rect(left, top + plot_h + 30, 10, 10, "#1f77b4");
    svg.text(left + 14, top + plot_h + 39, "validation micro %", 10);
    svg.rect(left + 150, top + plot_h + 30, 10, 10, "#ff7f0e");
    svg.text(left + 164, top + plot_h + 39, "validation macro %", 10);
    svg.save(path);
}

}  // namespace fer
