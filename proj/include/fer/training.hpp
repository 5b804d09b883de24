#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fer/losses.hpp"

namespace fer {

struct TrainConfig {
    double lr = 0.001;
    int batch_size = 96;  // frames; batches are built from 48 adjacent pairs
    int max_epochs = 50;
    int patience = 5;  // epochs without validation improvement before stopping
    LossWeights lambdas;
    std::uint64_t seed = 0;
    LossNormalization norm = LossNormalization::PerBatch;
    std::vector<RepId> active;  // empty = all 15 networks train jointly
    RepId monitor{Part::Face, RepKind::Appearance};  // validation-accuracy classifier
    int supervised_warmup_epochs = 0;  // epochs with all lambda forced to 0
    int threads = 1;
};

struct TrainLogRow {
    int step = 0;
    int epoch = 0;
    LossBreakdown loss;
    LossWeights lambdas;
};

struct TrainResult {
    int best_epoch = 0;
    double best_val_micro = 0.0;
    int epochs_run = 0;
    bool aborted = false;
    std::string abort_reason;
    std::vector<TrainLogRow> log;
    std::vector<double> val_micro_per_epoch;
};

/// Epoch batch plan: every adjacent frame pair of every video exactly once,
/// shuffled, 48 pairs per batch; length-1 sequences fill residual capacity
/// as singleton groups.
std::vector<Batch> make_batches(const SemiSupervisedDataset& ds, const std::vector<int>& videos,
                                int batch_size, std::uint64_t seed);

/// Labeled-frame accuracy of one classifier over the given videos (the
/// validation metric).
double labeled_frame_micro(const ModelPool& pool, RepId rep, const SemiSupervisedDataset& ds,
                           const std::vector<int>& videos);
double labeled_frame_macro(const ModelPool& pool, RepId rep, const SemiSupervisedDataset& ds,
                           const std::vector<int>& videos);

/// Mini-batch Adam on the full objective with early stopping on validation
/// accuracy of the monitor classifier. The pool is left at the best
/// checkpoint. A non-finite loss or gradient aborts, restores the best
/// checkpoint, and reports the reason.
TrainResult train(ModelPool& pool, const SemiSupervisedDataset& ds, const SplitResult& split,
                  const TrainConfig& config);

void write_train_log_csv(const std::filesystem::path& path, const std::vector<TrainLogRow>& log);

/// Grid search over one or two lambda axes (the others fixed at 0),
/// re-seeding the pool identically per cell.
struct GridSpec {
    std::string axes = "t";  // subset of "tcr", one or two characters
    std::vector<double> values = {1e-10, 1e-8, 1e-7, 1e-6, 1e-4, 1e-2};
};

struct GridCell {
    LossWeights lambdas;
    double val_micro = 0, val_macro = 0;
    int best_epoch = 0;
    bool failed = false;
    std::string error;
};

struct GridResult {
    std::vector<GridCell> cells;
    int best_micro = -1;  // cell indices
    int best_macro = -1;
};

GridResult grid_search(const SemiSupervisedDataset& ds, const SplitResult& split,
                       const GridSpec& grid, const TrainConfig& base);

void write_grid_csv(const std::filesystem::path& path, const GridResult& result);
void write_grid_svg(const std::filesystem::path& path, const GridResult& result);

}  // namespace fer
