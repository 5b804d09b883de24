#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "fer/dataset.hpp"
#include "fer/model_pool.hpp"

namespace fer {

/// Percentage of correct predictions. pred/truth are 1-based class indices.
double micro_accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

/// Unweighted mean of per-class correct percentages; classes absent from
/// truth are excluded from the average.
double macro_accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

/// 7x7 counts, rows = true class, columns = predicted (1-based indices).
struct ConfusionMatrix {
    std::array<std::array<long long, 7>, 7> counts{};

    void add(int truth, int pred) {
        counts[static_cast<std::size_t>(truth - 1)][static_cast<std::size_t>(pred - 1)] += 1;
    }
    long long row_total(int truth) const {
        long long n = 0;
        for (long long c : counts[static_cast<std::size_t>(truth - 1)]) n += c;
        return n;
    }
};

/// Adjacent-frame prediction changes within one sequence.
int flip_count(const std::vector<int>& predictions);

/// Eq. (2): majority vote over the window (the last `window` frames, or the
/// full sequence when window <= 0). Ties go to the class with the highest
/// summed probability mass over the window, then to the lowest index.
int predict_video(const ModelPool& pool, RepId rep, const VideoSequence& video, int window = -1);

/// Majority vote over per-frame distributions (the decision kernel of
/// predict_video, exposed for testing).
int majority_vote(const std::vector<std::array<double, 7>>& dists);

struct ClassifierMetrics {
    double image_micro = 0, image_macro = 0;
    double video_micro = 0, video_macro = 0;
    std::array<double, 7> per_class_image{};  // -1 when the class is absent
    std::array<double, 6> per_class_video{};  // emotions only (no neutral videos)
    ConfusionMatrix image_cm, video_cm;
    long long image_n = 0, video_n = 0;
};

/// Rows: the 15 classifiers (canonical names) plus "avg_all".
struct EvalReport {
    std::vector<std::pair<std::string, ClassifierMetrics>> rows;

    const ClassifierMetrics& row(const std::string& name) const;
};

/// Image-level metrics over labeled frames of the given videos, video-level
/// metrics over their full sequences via Eq. (2).
EvalReport evaluate(const ModelPool& pool, const SemiSupervisedDataset& ds,
                    const std::vector<int>& videos);

/// Mean / standard deviation of every metric cell across reports (sample
/// standard deviation; 0 for a single report).
struct AggregateCell {
    double mean = 0, stddev = 0;
};
struct AggregateReport {
    std::vector<std::pair<std::string, std::array<AggregateCell, 4>>> rows;  // micro/macro x image/video
};
AggregateReport aggregate_reports(const std::vector<EvalReport>& reports);

/// Occlusion study on peak (last) frames: appearance accuracy with the part
/// blacked out vs shape accuracy from the untouched landmarks, per emotion.
struct OcclusionRow {
    Label emotion;
    Part covered;
    double acc_app = 0, acc_shape = 0;
    long long n = 0;
};
std::vector<OcclusionRow> occlusion_experiment(const ModelPool& pool,
                                               const std::vector<const VideoSequence*>& videos,
                                               const std::vector<Part>& parts);

/// Per-frame predictions of one video under named model configurations.
struct TimelineExport {
    std::string video_id;
    std::vector<Label> truth;  // derived frame labels
    std::vector<std::string> config_names;
    std::vector<std::vector<int>> predictions;  // [config][frame]
    std::vector<int> flips;                     // per config
};
TimelineExport export_timeline(const std::vector<std::pair<std::string, const ModelPool*>>& configs,
                               RepId rep, const VideoSequence& video);
void write_timeline_svg(const std::filesystem::path& path, const TimelineExport& timeline);

}  // namespace fer
