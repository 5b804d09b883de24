#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>

#include "fer/error.hpp"
#include "fer/evaluation.hpp"
#include "fer/representations.hpp"
#include "fer/rng.hpp"
#include "fer/synthetic.hpp"

using namespace fer;

namespace {

/// Count-based accuracy oracle.
double micro_reference(const std::vector<int>& pred, const std::vector<int>& truth) {
    int correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == truth[i] ? 1 : 0;
    return 100.0 * correct / static_cast<double>(pred.size());
}

double macro_reference(const std::vector<int>& pred, const std::vector<int>& truth) {
    std::map<int, std::pair<int, int>> per_class;  // class -> (correct, total)
    for (std::size_t i = 0; i < pred.size(); ++i) {
        auto& [correct, total] = per_class[truth[i]];
        ++total;
        if (pred[i] == truth[i]) ++correct;
    }
    double sum = 0.0;
    for (const auto& [cls, ct] : per_class) sum += static_cast<double>(ct.first) / ct.second;
    return 100.0 * sum / static_cast<double>(per_class.size());
}

/// Exhaustive vote-count oracle: majority, then summed mass, then index.
int vote_reference(const std::vector<std::array<double, 7>>& dists) {
    std::array<int, 7> votes{};
    std::array<double, 7> mass{};
    for (const auto& d : dists) {
        int best = 0;
        for (int c = 1; c < 7; ++c)
            if (d[static_cast<std::size_t>(c)] > d[static_cast<std::size_t>(best)]) best = c;
        votes[static_cast<std::size_t>(best)] += 1;
        for (int c = 0; c < 7; ++c) mass[static_cast<std::size_t>(c)] += d[static_cast<std::size_t>(c)];
    }
    int winner = 0;
    for (int c = 1; c < 7; ++c) {
        const auto wc = static_cast<std::size_t>(winner), cc = static_cast<std::size_t>(c);
        if (votes[cc] > votes[wc]) winner = c;
        else if (votes[cc] == votes[wc] && mass[cc] > mass[wc]) winner = c;
    }
    return winner + 1;
}

std::array<double, 7> one_hot7(int cls) {
    std::array<double, 7> p{};
    p[static_cast<std::size_t>(cls - 1)] = 1.0;
    return p;
}

SemiSupervisedDataset small_dataset() {
    SyntheticConfig cfg;
    cfg.videos_per_class = 1;
    cfg.min_frames = 10;
    cfg.max_frames = 10;
    cfg.image_size = 48;
    cfg.seed = 33;
    return build_semisupervised_dataset(generate_synthetic_corpus(cfg), 0.1, 0.7);
}

ModelPool& shared_pool() {
    static ModelPool pool = ModelPool::create(3);
    return pool;
}

}  // namespace

TEST_CASE("micro accuracy basics and errors") {
    CHECK(micro_accuracy({1, 2, 3}, {1, 2, 3}) == 100.0);
    CHECK(micro_accuracy({1, 2, 3, 4}, {1, 2, 3, 5}) == 75.0);
    CHECK_THROWS_AS((void)micro_accuracy({}, {}), Error);
    CHECK_THROWS_AS((void)micro_accuracy({1}, {1, 2}), Error);
}

TEST_CASE("macro vs micro on the skewed two-class fixture") {
    // Class 1: 9 items all correct; class 2: 1 item wrong.
    std::vector<int> truth(9, 1), pred(9, 1);
    truth.push_back(2);
    pred.push_back(1);
    CHECK(micro_accuracy(pred, truth) == 90.0);
    CHECK(macro_accuracy(pred, truth) == 50.0);
}

TEST_CASE("accuracies match count oracles on random fixtures") {
    Rng rng(1);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = rng.uniform_int(1, 40);
        std::vector<int> pred, truth;
        for (int i = 0; i < n; ++i) {
            pred.push_back(rng.uniform_int(1, 7));
            truth.push_back(rng.uniform_int(1, 7));
        }
        CHECK(micro_accuracy(pred, truth) == doctest::Approx(micro_reference(pred, truth)).epsilon(1e-12));
        CHECK(macro_accuracy(pred, truth) == doctest::Approx(macro_reference(pred, truth)).epsilon(1e-12));
    }
}

TEST_CASE("balanced classes make micro equal macro exactly") {
    Rng rng(2);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<int> pred, truth;
        for (int cls = 1; cls <= 7; ++cls)
            for (int i = 0; i < 8; ++i) {  // power-of-two class size
                truth.push_back(cls);
                pred.push_back(rng.uniform_int(1, 7));
            }
        CHECK(micro_accuracy(pred, truth) == macro_accuracy(pred, truth));
    }
}

TEST_CASE("majority vote: basic examples") {
    CHECK(majority_vote({one_hot7(3), one_hot7(3), one_hot7(5)}) == 3);
    CHECK(majority_vote({one_hot7(6)}) == 6);
    CHECK_THROWS_AS((void)majority_vote({}), Error);
}

TEST_CASE("majority vote matches the exhaustive oracle on all windows <= 4 over 3 classes") {
    for (int len = 1; len <= 4; ++len) {
        int combos = 1;
        for (int i = 0; i < len; ++i) combos *= 3;
        for (int code = 0; code < combos; ++code) {
            std::vector<std::array<double, 7>> dists;
            int c = code;
            for (int i = 0; i < len; ++i) {
                dists.push_back(one_hot7(1 + c % 3));
                c /= 3;
            }
            CHECK(majority_vote(dists) == vote_reference(dists));
        }
    }
}

TEST_CASE("majority vote matches the oracle on random soft distributions") {
    Rng rng(3);
    for (int trial = 0; trial < 500; ++trial) {
        const int len = rng.uniform_int(1, 6);
        std::vector<std::array<double, 7>> dists;
        for (int i = 0; i < len; ++i) {
            std::array<double, 7> p{};
            double sum = 0.0;
            for (auto& v : p) sum += (v = rng.uniform(0.0, 1.0));
            for (auto& v : p) v /= sum;
            dists.push_back(p);
        }
        CHECK(majority_vote(dists) == vote_reference(dists));
    }
}

TEST_CASE("vote ties break by summed probability mass") {
    // One vote each for classes 1 and 2, but class 2 holds more total mass.
    std::array<double, 7> a{0.6, 0.35, 0.01, 0.01, 0.01, 0.01, 0.01};
    std::array<double, 7> b{0.05, 0.9, 0.01, 0.01, 0.01, 0.01, 0.01};
    CHECK(majority_vote({a, b}) == 2);
    // Equal mass as well: lowest index wins.
    CHECK(majority_vote({one_hot7(4), one_hot7(2)}) == 2);
}

TEST_CASE("window=1 video prediction equals the frame rule on the last frame") {
    auto ds = small_dataset();
    auto& pool = shared_pool();
    const RepId rep{Part::Mouth, RepKind::Appearance};
    for (int vi : {0, 2, 4}) {
        const auto& video = ds.sequences[static_cast<std::size_t>(vi)];
        const auto& last = video.frames.back();
        CHECK(predict_video(pool, rep, video, 1) ==
              predict_frame(pool, rep, to_float(last.pixels), last.landmarks));
    }
}

TEST_CASE("flip counts") {
    CHECK(flip_count({4, 4, 4, 4}) == 0);
    CHECK(flip_count({1, 2, 1, 2, 1}) == 4);
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<int> preds;
        const int n = rng.uniform_int(1, 30);
        for (int i = 0; i < n; ++i) preds.push_back(rng.uniform_int(1, 3));
        int direct = 0;
        for (int i = 1; i < n; ++i)
            if (preds[static_cast<std::size_t>(i)] != preds[static_cast<std::size_t>(i - 1)]) ++direct;
        CHECK(flip_count(preds) == direct);
    }
}

TEST_CASE("evaluate produces 16 rows and omits neutral at video level") {
    auto ds = small_dataset();
    auto& pool = shared_pool();
    const std::vector<int> videos{0, 1};
    const auto report = evaluate(pool, ds, videos);
    REQUIRE(report.rows.size() == 16);
    CHECK(report.rows.back().first == "avg_all");
    CHECK_NOTHROW((void)report.row("face_app"));
    CHECK_NOTHROW((void)report.row("jaw_shape"));

    for (const auto& [name, metrics] : report.rows) {
        CHECK(metrics.video_n == 2);
        // Per-class video table has only the six emotions.
        CHECK(metrics.per_class_video.size() == 6);
        // Macro is the unweighted mean of present per-class accuracies.
        double sum = 0.0;
        int present = 0;
        for (double v : metrics.per_class_image)
            if (v >= 0.0) {
                sum += v;
                ++present;
            }
        CHECK(metrics.image_macro == doctest::Approx(sum / present).epsilon(1e-9));
    }

    // Identical pools across two "seeds": aggregate stddev is 0.
    const auto agg = aggregate_reports({report, report});
    for (const auto& [name, cells] : agg.rows)
        for (const auto& cell : cells) CHECK(cell.stddev == 0.0);
}

TEST_CASE("occlusion leaves shape predictions bit-identical") {
    auto ds = small_dataset();
    auto& pool = shared_pool();
    const RepId face_shape{Part::Face, RepKind::Shape};
    for (int vi : {0, 3}) {
        const auto& peak = ds.sequences[static_cast<std::size_t>(vi)].frames.back();
        const ImageF img = to_float(peak.pixels);
        for (const Part part : {Part::Mouth, Part::Nose}) {
            const ImageF occluded = apply_occlusion(img, peak.landmarks, part_spec(part));
            const auto p_clear = pool_forward(pool, face_shape,
                                              make_representation(img, peak.landmarks, face_shape));
            const auto p_occluded = pool_forward(
                pool, face_shape, make_representation(occluded, peak.landmarks, face_shape));
            CHECK(p_clear == p_occluded);
        }
    }
}

TEST_CASE("occlusion experiment emits per-emotion rows for each covered part") {
    auto ds = small_dataset();
    auto& pool = shared_pool();
    std::vector<const VideoSequence*> videos;
    for (const auto& v : ds.sequences) videos.push_back(&v);

    const auto rows = occlusion_experiment(pool, videos, {Part::Mouth, Part::Nose});
    CHECK(rows.size() == 12);  // 6 emotions x 2 parts
    for (const auto& row : rows) {
        CHECK(row.n == 1);
        CHECK(row.acc_app >= 0.0);
        CHECK(row.acc_app <= 100.0);
        CHECK(row.acc_shape >= 0.0);
        CHECK(row.acc_shape <= 100.0);
        CHECK((row.covered == Part::Mouth || row.covered == Part::Nose));
    }
    CHECK_THROWS_AS((void)occlusion_experiment(pool, videos, {Part::Face}), Error);
}

TEST_CASE("timeline export: flips match and SVG is written") {
    auto ds = small_dataset();
    auto& pool = shared_pool();
    const auto& video = ds.sequences[1];
    const auto timeline = export_timeline({{"baseline", &pool}}, {Part::Mouth, RepKind::Appearance},
                                          video);
    REQUIRE(timeline.predictions.size() == 1);
    CHECK(timeline.predictions[0].size() == video.frames.size());
    CHECK(timeline.flips[0] == flip_count(timeline.predictions[0]));

    const auto path = std::filesystem::temp_directory_path() / "fer_timeline_test.svg";
    write_timeline_svg(path, timeline);
    CHECK(std::filesystem::file_size(path) > 100);
    std::filesystem::remove(path);
}
