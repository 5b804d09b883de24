#include "fer/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "fer/error.hpp"
#include "fer/representations.hpp"
#include "fer/svg.hpp"

namespace fer {

double micro_accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
    if (pred.empty() || pred.size() != truth.size())
        throw data_error("micro_accuracy: need equally sized, non-empty inputs");
    long long correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == truth[i]) ++correct;
    return 100.0 * static_cast<double>(correct) / static_cast<double>(pred.size());
}

double macro_accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
    if (pred.empty() || pred.size() != truth.size())
        throw data_error("macro_accuracy: need equally sized, non-empty inputs");
    std::array<long long, 7> total{}, correct{};
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const int y = truth[i];
        if (y < 1 || y > 7) throw data_error("macro_accuracy: class index out of range");
        ++total[static_cast<std::size_t>(y - 1)];
        if (pred[i] == y) ++correct[static_cast<std::size_t>(y - 1)];
    }
    double sum = 0.0;
    int present = 0;
    for (int c = 0; c < 7; ++c) {
        if (total[static_cast<std::size_t>(c)] == 0) continue;
        sum += static_cast<double>(correct[static_cast<std::size_t>(c)]) /
               static_cast<double>(total[static_cast<std::size_t>(c)]);
        ++present;
    }
    return 100.0 * sum / static_cast<double>(present);
}

int flip_count(const std::vector<int>& predictions) {
    int flips = 0;
    for (std::size_t i = 1; i < predictions.size(); ++i)
        if (predictions[i] != predictions[i - 1]) ++flips;
    return flips;
}

int majority_vote(const std::vector<std::array<double, 7>>& dists) {
    if (dists.empty()) throw data_error("majority_vote: empty window");
    std::array<int, 7> votes{};
    std::array<double, 7> mass{};
    for (const auto& p : dists) {
        votes[static_cast<std::size_t>(argmax_class(p) - 1)] += 1;
        for (int c = 0; c < 7; ++c) mass[static_cast<std::size_t>(c)] += p[static_cast<std::size_t>(c)];
    }
    int best = 0;
    for (int c = 1; c < 7; ++c) {
        const auto bc = static_cast<std::size_t>(best), cc = static_cast<std::size_t>(c);
        if (votes[cc] > votes[bc] || (votes[cc] == votes[bc] && mass[cc] > mass[bc])) best = c;
    }
    return best + 1;
}

namespace {

std::vector<std::array<double, 7>> frame_distributions(const ModelPool& pool, RepId rep,
                                                       const VideoSequence& video, int window) {
    const int n = static_cast<int>(video.frames.size());
    const int count = (window <= 0 || window > n) ? n : window;
    std::vector<std::array<double, 7>> dists;
    dists.reserve(static_cast<std::size_t>(count));
    for (int i = n - count; i < n; ++i) {
        const FrameRecord& frame = video.frames[static_cast<std::size_t>(i)];
        const ImageF img = to_float(frame.pixels);
        dists.push_back(pool_forward(
            pool, rep,
            make_representation(img, frame.landmarks, rep,
                                frame.video_id + "[t=" + std::to_string(frame.t) + "]")));
    }
    return dists;
}

}  // namespace

int predict_video(const ModelPool& pool, RepId rep, const VideoSequence& video, int window) {
    return majority_vote(frame_distributions(pool, rep, video, window));
}

const ClassifierMetrics& EvalReport::row(const std::string& name) const {
    for (const auto& [n, m] : rows)
        if (n == name) return m;
    throw data_error("evaluation report has no row '" + name + "'");
}

EvalReport evaluate(const ModelPool& pool, const SemiSupervisedDataset& ds,
                    const std::vector<int>& videos) {
    constexpr int kEnsembleIdx = kRepresentationCount;  // row 15 = avg_all
    const int n_rows = kRepresentationCount + 1;

    // Predictions and truths per classifier.
    std::vector<std::vector<int>> image_pred(static_cast<std::size_t>(n_rows));
    std::vector<int> image_truth;
    std::vector<std::vector<int>> video_pred(static_cast<std::size_t>(n_rows));
    std::vector<int> video_truth;

    for (const int vi : videos) {
        const VideoSequence& video = ds.sequences[static_cast<std::size_t>(vi)];
        // One forward pass per frame per classifier, reused for both levels.
        std::vector<std::vector<std::array<double, 7>>> dists(
            static_cast<std::size_t>(n_rows));
        for (const FrameRecord& frame : video.frames) {
            const ImageF img = to_float(frame.pixels);
            const std::string name = frame.video_id + "[t=" + std::to_string(frame.t) + "]";
            const auto reps = make_all_representations(img, frame.landmarks, name);
            std::vector<std::array<double, 7>> per_net;
            per_net.reserve(kRepresentationCount);
            for (int r = 0; r < kRepresentationCount; ++r)
                per_net.push_back(pool.net(r).forward_nograd(reps[static_cast<std::size_t>(r)]));
            for (int r = 0; r < kRepresentationCount; ++r)
                dists[static_cast<std::size_t>(r)].push_back(per_net[static_cast<std::size_t>(r)]);
            dists[static_cast<std::size_t>(kEnsembleIdx)].push_back(average_distributions(per_net));

            if (frame.label != Label::none) {
                image_truth.push_back(label_index(frame.label));
                for (int r = 0; r < n_rows; ++r)
                    image_pred[static_cast<std::size_t>(r)].push_back(
                        argmax_class(dists[static_cast<std::size_t>(r)].back()));
            }
        }
        if (video.video_label != Label::none) {
            video_truth.push_back(label_index(video.video_label));
            for (int r = 0; r < n_rows; ++r)
                video_pred[static_cast<std::size_t>(r)].push_back(
                    majority_vote(dists[static_cast<std::size_t>(r)]));
        }
    }

    EvalReport report;
    for (int r = 0; r < n_rows; ++r) {
        ClassifierMetrics m;
        const auto& ip = image_pred[static_cast<std::size_t>(r)];
        if (!ip.empty()) {
            m.image_micro = micro_accuracy(ip, image_truth);
            m.image_macro = macro_accuracy(ip, image_truth);
            m.image_n = static_cast<long long>(ip.size());
            for (std::size_t i = 0; i < ip.size(); ++i) m.image_cm.add(image_truth[i], ip[i]);
            for (int c = 1; c <= 7; ++c) {
                const long long total = m.image_cm.row_total(c);
                m.per_class_image[static_cast<std::size_t>(c - 1)] =
                    total == 0 ? -1.0
                               : 100.0 *
                                     static_cast<double>(
                                         m.image_cm.counts[static_cast<std::size_t>(c - 1)]
                                                          [static_cast<std::size_t>(c - 1)]) /
                                     static_cast<double>(total);
            }
        }
        const auto& vp = video_pred[static_cast<std::size_t>(r)];
        if (!vp.empty()) {
            m.video_micro = micro_accuracy(vp, video_truth);
            m.video_macro = macro_accuracy(vp, video_truth);
            m.video_n = static_cast<long long>(vp.size());
            for (std::size_t i = 0; i < vp.size(); ++i) m.video_cm.add(video_truth[i], vp[i]);
            for (int c = 1; c <= 6; ++c) {  // no neutral row at video level
                const long long total = m.video_cm.row_total(c);
                m.per_class_video[static_cast<std::size_t>(c - 1)] =
                    total == 0 ? -1.0
                               : 100.0 *
                                     static_cast<double>(
                                         m.video_cm.counts[static_cast<std::size_t>(c - 1)]
                                                          [static_cast<std::size_t>(c - 1)]) /
                                     static_cast<double>(total);
            }
        }
        const std::string name =
            r == kEnsembleIdx ? "avg_all" : rep_name(all_representations()[static_cast<std::size_t>(r)]);
        report.rows.emplace_back(name, std::move(m));
    }
    return report;
}

AggregateReport aggregate_reports(const std::vector<EvalReport>& reports) {
    if (reports.empty()) throw data_error("aggregate_reports: no reports");
    AggregateReport agg;
    const auto& first = reports.front();
    for (std::size_t row = 0; row < first.rows.size(); ++row) {
        std::array<AggregateCell, 4> cells{};
        for (int metric = 0; metric < 4; ++metric) {
            std::vector<double> values;
            for (const auto& report : reports) {
                const auto& m = report.rows[row].second;
                const double v = metric == 0   ? m.image_micro
                                 : metric == 1 ? m.image_macro
                                 : metric == 2 ? m.video_micro
                                               : m.video_macro;
                values.push_back(v);
            }
            double mean = 0.0;
            for (double v : values) mean += v;
            mean /= static_cast<double>(values.size());
            double var = 0.0;
            for (double v : values) var += (v - mean) * (v - mean);
            const double stddev =
                values.size() > 1 ? std::sqrt(var / static_cast<double>(values.size() - 1)) : 0.0;
            cells[static_cast<std::size_t>(metric)] = {mean, stddev};
        }
        agg.rows.emplace_back(first.rows[row].first, cells);
    }
    return agg;
}

std::vector<OcclusionRow> occlusion_experiment(const ModelPool& pool,
                                               const std::vector<const VideoSequence*>& videos,
                                               const std::vector<Part>& parts) {
    const RepId face_app{Part::Face, RepKind::Appearance};
    const RepId face_shape{Part::Face, RepKind::Shape};

    std::vector<OcclusionRow> rows;
    for (const Part part : parts) {
        if (part == Part::Face) throw config_error("occlusion part must not be the whole face");
        std::array<long long, 6> n{}, correct_app{}, correct_shape{};
        for (const VideoSequence* video : videos) {
            if (video->video_label == Label::none) continue;
            const FrameRecord& peak = video->frames.back();  // the most expressive frame
            const int truth = label_index(video->video_label);
            const ImageF img = to_float(peak.pixels);
            const ImageF occluded = apply_occlusion(img, peak.landmarks, part_spec(part));

            const int pred_app = predict_frame(pool, face_app, occluded, peak.landmarks);
            // Landmarks are reused unchanged, so this equals the unoccluded
            // shape prediction by construction.
            const int pred_shape = predict_frame(pool, face_shape, img, peak.landmarks);

            const auto c = static_cast<std::size_t>(truth - 1);
            ++n[c];
            if (pred_app == truth) ++correct_app[c];
            if (pred_shape == truth) ++correct_shape[c];
        }
        for (int e = 0; e < 6; ++e) {
            const auto ec = static_cast<std::size_t>(e);
            if (n[ec] == 0) continue;
            OcclusionRow row;
            row.emotion = static_cast<Label>(e + 1);
            row.covered = part;
            row.n = n[ec];
            row.acc_app = 100.0 * static_cast<double>(correct_app[ec]) / static_cast<double>(n[ec]);
            row.acc_shape = 100.0 * static_cast<double>(correct_shape[ec]) / static_cast<double>(n[ec]);
            rows.push_back(row);
        }
    }
    return rows;
}

TimelineExport export_timeline(const std::vector<std::pair<std::string, const ModelPool*>>& configs,
                               RepId rep, const VideoSequence& video) {
    TimelineExport timeline;
    timeline.video_id = video.id;
    for (const FrameRecord& frame : video.frames) timeline.truth.push_back(frame.label);
    for (const auto& [name, pool] : configs) {
        std::vector<int> preds;
        const auto dists = frame_distributions(*pool, rep, video, -1);
        preds.reserve(dists.size());
        for (const auto& p : dists) preds.push_back(argmax_class(p));
        timeline.config_names.push_back(name);
        timeline.flips.push_back(flip_count(preds));
        timeline.predictions.push_back(std::move(preds));
    }
    return timeline;
}

void write_timeline_svg(const std::filesystem::path& path, const TimelineExport& timeline) {
    const int frames = static_cast<int>(timeline.truth.size());
    const int cell = 18, row_h = 26, left = 150, top = 30;
    const int width = left + frames * cell + 20;
    const int height = top + (static_cast<int>(timeline.predictions.size()) + 1) * row_h + 30;
    SvgDoc svg(width, height);

    svg.text(left, top - 12, "frame-by-frame predictions, video " + timeline.video_id, 13);
    svg.text(10, top + row_h - 10, "ground truth", 12);
    for (int f = 0; f < frames; ++f) {
        const Label y = timeline.truth[static_cast<std::size_t>(f)];
        const std::string fill = y == Label::none ? "#e8e8e8" : class_color(label_index(y));
        svg.rect(left + f * cell, top, cell - 2, row_h - 6, fill);
    }
    for (std::size_t cfg = 0; cfg < timeline.predictions.size(); ++cfg) {
        const int y0 = top + (static_cast<int>(cfg) + 1) * row_h;
        svg.text(10, y0 + row_h - 10,
                 timeline.config_names[cfg] + " (flips " + std::to_string(timeline.flips[cfg]) + ")",
                 12);
        for (int f = 0; f < frames; ++f) {
            const int pred = timeline.predictions[cfg][static_cast<std::size_t>(f)];
            const Label truth = timeline.truth[static_cast<std::size_t>(f)];
            // Wrong labeled-frame predictions are drawn red, as in the
            // qualitative timeline figure.
            const bool wrong = truth != Label::none && pred != label_index(truth);
            svg.rect(left + f * cell, y0, cell - 2, row_h - 6,
                     wrong ? "#ff0000" : class_color(pred));
        }
    }
    // Legend.
    const int ly = height - 18;
    int lx = left;
    for (int c = 1; c <= 7; ++c) {
        svg.rect(lx, ly - 10, 10, 10, class_color(c));
        svg.text(lx + 14, ly, label_name(static_cast<Label>(c)), 10);
        lx += 14 + 11 * static_cast<int>(label_name(static_cast<Label>(c)).size());
    }
    svg.save(path);
}

}  // namespace fer
