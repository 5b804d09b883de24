#include "fer/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>

#include "fer/error.hpp"
#include "fer/rng.hpp"

namespace fer {

std::string label_name(Label y) {
    switch (y) {
        case Label::none: return "none";
        case Label::anger: return "anger";
        case Label::disgust: return "disgust";
        case Label::fear: return "fear";
        case Label::happiness: return "happiness";
        case Label::sadness: return "sadness";
        case Label::surprise: return "surprise";
        case Label::neutral: return "neutral";
    }
    throw config_error("unknown label enum value");
}

Label label_from_name(const std::string& name) {
    for (int i = 1; i <= 7; ++i) {
        const Label y = static_cast<Label>(i);
        if (label_name(y) == name) return y;
    }
    throw data_error("unknown label '" + name + "' (allowed: anger, disgust, fear, happiness, "
                     "sadness, surprise, neutral)");
}

std::vector<Label> semisupervised_labels(int length, Label video_label, double alpha, double beta) {
    if (!(alpha > 0.0 && alpha < beta && beta < 1.0))
        throw config_error("need 0 < alpha < beta < 1, got alpha=" + std::to_string(alpha) +
                           " beta=" + std::to_string(beta));
    if (length < 1) throw data_error("sequence length must be >= 1");
    const int neutral_end = static_cast<int>(std::floor(alpha * length));  // t in [1, neutral_end]
    const int none_end = static_cast<int>(std::floor(beta * length));      // t in (neutral_end, none_end]
    std::vector<Label> labels(static_cast<std::size_t>(length), Label::none);
    for (int t = 1; t <= length; ++t) {
        if (t <= neutral_end)
            labels[static_cast<std::size_t>(t - 1)] = Label::neutral;
        else if (t > none_end)
            labels[static_cast<std::size_t>(t - 1)] = video_label;
    }
    return labels;
}

SemiSupervisedDataset build_semisupervised_dataset(std::vector<VideoSequence> sequences,
                                                   double alpha, double beta) {
    SemiSupervisedDataset ds;
    ds.alpha = alpha;
    ds.beta = beta;
    for (auto& seq : sequences) {
        if (seq.video_label == Label::none) {
            // Fully unsupervised clip: every frame stays unlabeled.
            for (auto& f : seq.frames) f.label = Label::none;
            continue;
        }
        const auto labels = semisupervised_labels(static_cast<int>(seq.frames.size()),
                                                  seq.video_label, alpha, beta);
        for (std::size_t i = 0; i < seq.frames.size(); ++i) seq.frames[i].label = labels[i];
    }
    ds.sequences = std::move(sequences);
    return ds;
}

double class_weight(Label y) {
    if (y == Label::none) return 0.0;
    return y == Label::neutral ? 0.1 : 1.0;
}

void retain_fraction_of_labels(SemiSupervisedDataset& ds, double fraction, std::uint64_t seed) {
    if (fraction < 0.0 || fraction > 1.0) throw config_error("label fraction must lie in [0,1]");
    std::vector<FrameRecord*> labeled;
    for (auto& video : ds.sequences)
        for (auto& frame : video.frames)
            if (frame.label != Label::none) labeled.push_back(&frame);
    Rng rng(derive_seed(seed, 7));
    rng.shuffle(labeled);
    const std::size_t keep = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(labeled.size())));
    for (std::size_t i = keep; i < labeled.size(); ++i) labeled[i]->label = Label::none;
}

SplitResult split_dataset(const std::vector<VideoSequence>& sequences, const SplitConfig& config) {
    if (!(config.train > 0 && config.validation > 0 && config.test > 0))
        throw config_error("split fractions must be positive");
    if (std::abs(config.train + config.validation + config.test - 1.0) > 1e-9)
        throw config_error("split fractions must sum to 1");

    // Group video indices by label, in label order then manifest order.
    std::map<Label, std::vector<int>> by_class;
    for (int i = 0; i < static_cast<int>(sequences.size()); ++i)
        by_class[sequences[static_cast<std::size_t>(i)].video_label].push_back(i);

    SplitResult result;
    Rng rng(derive_seed(config.seed, 1));
    int round_robin = 0;
    const double fractions[3] = {config.train, config.validation, config.test};
    std::vector<int>* buckets[3] = {&result.train, &result.validation, &result.test};

    for (auto& [label, indices] : by_class) {
        rng.shuffle(indices);
        const int n = static_cast<int>(indices.size());
        if (n < 3) {
            result.warnings.push_back("class '" + label_name(label) + "' has only " +
                                      std::to_string(n) + " video(s); placing round-robin");
            for (int idx : indices) {
                buckets[round_robin % 3]->push_back(idx);
                ++round_robin;
            }
            continue;
        }
        // Largest-remainder allocation; remainder ties resolved in
        // train/validation/test order.
        int counts[3];
        double remainders[3];
        int assigned = 0;
        for (int b = 0; b < 3; ++b) {
            const double raw = fractions[b] * n;
            counts[b] = static_cast<int>(std::floor(raw));
            remainders[b] = raw - counts[b];
            assigned += counts[b];
        }
        int leftover = n - assigned;
        std::array<int, 3> order = {0, 1, 2};
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return remainders[a] > remainders[b]; });
        for (int j = 0; leftover > 0; ++j, --leftover) counts[order[static_cast<std::size_t>(j % 3)]] += 1;

        int pos = 0;
        for (int b = 0; b < 3; ++b)
            for (int j = 0; j < counts[b]; ++j) buckets[b]->push_back(indices[static_cast<std::size_t>(pos++)]);
    }
    for (auto* bucket : buckets) std::sort(bucket->begin(), bucket->end());
    return result;
}

namespace {

using nlohmann::json;

Landmarks68 landmarks_from_csv(const std::filesystem::path& path, std::vector<std::string>& errors,
                               const std::string& where) {
    Landmarks68 lm;
    std::ifstream in(path);
    if (!in) {
        errors.push_back(where + ": missing landmark file '" + path.string() + "'");
        return lm;
    }
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (row >= 68) {
            ++row;  // keep counting for the report
            continue;
        }
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double x, y;
        if (!(ls >> x >> y)) {
            errors.push_back(where + ": unparsable landmark row " + std::to_string(row + 1) +
                             " in '" + path.string() + "'");
            return lm;
        }
        lm.pts[static_cast<std::size_t>(row)] = {x, y};
        ++row;
    }
    if (row != 68)
        errors.push_back(where + ": expected 68 landmark rows, got " + std::to_string(row) +
                         " in '" + path.string() + "'");
    return lm;
}

}  // namespace

std::vector<VideoSequence> load_manifest(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw data_error("cannot open manifest '" + manifest_path.string() + "'");
    const auto base_dir = manifest_path.parent_path();

    std::vector<std::string> errors;
    std::vector<std::string> video_order;
    std::map<std::string, VideoSequence> videos;

    static const std::array<std::string, 5> kKeys = {"video_id", "t", "image", "landmarks",
                                                     "video_label"};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        const std::string where = "line " + std::to_string(line_no);
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            errors.push_back(where + ": invalid JSON (" + e.what() + ")");
            continue;
        }
        bool keys_ok = true;
        for (const auto& key : kKeys)
            if (!rec.contains(key)) {
                errors.push_back(where + ": missing key '" + key + "'");
                keys_ok = false;
            }
        for (auto it = rec.begin(); it != rec.end(); ++it)
            if (std::find(kKeys.begin(), kKeys.end(), it.key()) == kKeys.end()) {
                errors.push_back(where + ": unknown key '" + it.key() + "'");
                keys_ok = false;
            }
        if (!keys_ok) continue;

        FrameRecord frame;
        try {
            frame.video_id = rec.at("video_id").get<std::string>();
            frame.t = rec.at("t").get<int>();
        } catch (const json::exception& e) {
            errors.push_back(where + ": bad video_id/t (" + e.what() + ")");
            continue;
        }
        const std::string frame_name = frame.video_id + "[t=" + std::to_string(frame.t) + "]";

        bool record_ok = true;
        Label video_label = Label::none;
        if (!rec.at("video_label").is_null()) {
            try {
                video_label = label_from_name(rec.at("video_label").get<std::string>());
            } catch (const Error& e) {
                errors.push_back(where + " (" + frame_name + "): " + e.what());
                record_ok = false;
            }
        }

        try {
            frame.pixels = load_image(base_dir / rec.at("image").get<std::string>());
        } catch (const Error& e) {
            errors.push_back(where + " (" + frame_name + "): " + e.what());
            record_ok = false;
        }

        const auto& lmj = rec.at("landmarks");
        if (lmj.is_string()) {
            frame.landmarks = landmarks_from_csv(base_dir / lmj.get<std::string>(), errors,
                                                 where + " (" + frame_name + ")");
        } else if (lmj.is_array()) {
            if (lmj.size() != 68) {
                errors.push_back(where + " (" + frame_name + "): expected 68 landmarks, got " +
                                 std::to_string(lmj.size()));
                continue;
            }
            for (std::size_t i = 0; i < 68; ++i) {
                if (!lmj[i].is_array() || lmj[i].size() != 2) {
                    errors.push_back(where + " (" + frame_name + "): landmark " + std::to_string(i) +
                                     " is not an [x,y] pair");
                    break;
                }
                frame.landmarks.pts[i] = {lmj[i][0].get<double>(), lmj[i][1].get<double>()};
            }
        } else {
            errors.push_back(where + " (" + frame_name + "): landmarks must be an array or a CSV path");
            continue;
        }
        if (!frame.landmarks.all_finite())
            errors.push_back(where + " (" + frame_name + "): non-finite landmark coordinates");
        if (!record_ok) continue;

        auto [it, inserted] = videos.try_emplace(frame.video_id);
        if (inserted) {
            it->second.id = frame.video_id;
            it->second.video_label = video_label;
            video_order.push_back(frame.video_id);
        } else if (it->second.video_label != video_label) {
            errors.push_back(where + ": video '" + frame.video_id + "' has inconsistent video_label");
        }
        it->second.frames.push_back(std::move(frame));
    }

    for (const auto& id : video_order) {
        auto& video = videos.at(id);
        std::sort(video.frames.begin(), video.frames.end(),
                  [](const FrameRecord& a, const FrameRecord& b) { return a.t < b.t; });
        for (std::size_t i = 0; i < video.frames.size(); ++i) {
            if (video.frames[i].t != static_cast<int>(i) + 1) {
                errors.push_back("video '" + id + "': time indices must be consecutive from 1, found t=" +
                                 std::to_string(video.frames[i].t) + " at position " + std::to_string(i + 1));
                break;
            }
        }
        if (video.frames.size() > 1 && video.video_label == Label::neutral)
            errors.push_back("video '" + id + "': multi-frame clips cannot be labeled neutral");
    }

    if (!errors.empty()) {
        std::string report = "manifest '" + manifest_path.string() + "' failed validation (" +
                             std::to_string(errors.size()) + " problem(s)):";
        for (const auto& e : errors) report += "\n  - " + e;
        throw data_error(report);
    }

    std::vector<VideoSequence> out;
    out.reserve(video_order.size());
    for (const auto& id : video_order) out.push_back(std::move(videos.at(id)));
    return out;
}

std::filesystem::path write_corpus(const std::filesystem::path& dir,
                                   const std::vector<VideoSequence>& sequences) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "frames");
    fs::create_directories(dir / "landmarks");

    const auto manifest_path = dir / "manifest.jsonl";
    std::ofstream manifest(manifest_path, std::ios::trunc);
    if (!manifest) throw data_error("cannot write manifest '" + manifest_path.string() + "'");

    for (const auto& video : sequences) {
        for (const auto& frame : video.frames) {
            std::ostringstream stem;
            stem << video.id << "_t" << std::setw(3) << std::setfill('0') << frame.t;
            const std::string image_rel = "frames/" + stem.str() + ".png";
            const std::string lm_rel = "landmarks/" + stem.str() + ".csv";
            save_png(dir / image_rel, frame.pixels);

            std::ofstream lm(dir / lm_rel, std::ios::trunc);
            lm.precision(17);
            for (const auto& p : frame.landmarks.pts) lm << p.x << "," << p.y << "\n";

            nlohmann::json rec;
            rec["video_id"] = video.id;
            rec["t"] = frame.t;
            rec["image"] = image_rel;
            rec["landmarks"] = lm_rel;
            if (video.video_label == Label::none)
                rec["video_label"] = nullptr;
            else
                rec["video_label"] = label_name(video.video_label);
            manifest << rec.dump() << "\n";
        }
    }
    return manifest_path;
}

}  // namespace fer
