#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fer/image.hpp"
#include "fer/landmarks.hpp"

namespace fer {

/// Emotion classes, codified 1-7; none marks an unlabeled frame.
enum class Label : std::uint8_t {
    none = 0,
    anger = 1,
    disgust = 2,
    fear = 3,
    happiness = 4,
    sadness = 5,
    surprise = 6,
    neutral = 7,
};
constexpr int kClassCount = 7;
constexpr std::array<Label, 6> kEmotions = {Label::anger,   Label::disgust, Label::fear,
                                            Label::happiness, Label::sadness, Label::surprise};

std::string label_name(Label y);
Label label_from_name(const std::string& name);  // rejects anything outside the 7 classes
inline int label_index(Label y) { return static_cast<int>(y); }  // 1-based class index

struct FrameRecord {
    std::string video_id;
    int t = 1;  // 1-based time index
    Image8 pixels;
    Landmarks68 landmarks;
    Label label = Label::none;
};

struct VideoSequence {
    std::string id;
    std::vector<FrameRecord> frames;     // ordered by t
    Label video_label = Label::none;     // none = fully unlabeled clip
};

/// Per-frame labels for one video of the given length: the first
/// floor(alpha*T) frames are neutral, frames after floor(beta*T) carry the
/// video label, the middle is unlabeled.
std::vector<Label> semisupervised_labels(int length, Label video_label, double alpha, double beta);

/// The corpus D: sequences with alpha/beta-derived frame labels in place.
struct SemiSupervisedDataset {
    std::vector<VideoSequence> sequences;
    double alpha = 0.1;
    double beta = 0.7;
};

SemiSupervisedDataset build_semisupervised_dataset(std::vector<VideoSequence> sequences,
                                                   double alpha, double beta);

/// Eq. (3) example weight: 0.1 for neutral frames, 1.0 for other labeled
/// frames, 0.0 for unlabeled ones (excluded from the cross-entropy).
double class_weight(Label y);

/// Keeps a deterministic random subset of the labeled frames (per-frame
/// labels outside the subset become none). Used to thin supervision for
/// semi-supervised experiments.
void retain_fraction_of_labels(SemiSupervisedDataset& ds, double fraction, std::uint64_t seed);

struct SplitConfig {
    std::uint64_t seed = 0;
    double train = 0.70, validation = 0.15, test = 0.15;
};

struct SplitResult {
    std::vector<int> train, validation, test;  // indices into sequences
    std::vector<std::string> warnings;
};

/// Video-level stratified split: no video straddles partitions, per-class
/// counts follow the fractions by largest remainder (ties resolved in
/// train/validation/test order), deterministic in the seed. Classes with
/// fewer videos than partitions are placed round-robin with a warning.
SplitResult split_dataset(const std::vector<VideoSequence>& sequences, const SplitConfig& config);

/// Manifest ingestion: JSON-lines, one record per frame:
///   {"video_id": str, "t": int, "image": relpath,
///    "landmarks": 68x2 array | relpath to CSV, "video_label": str|null}
/// All validation problems are collected and reported together; a manifest
/// with any defect loads nothing.
std::vector<VideoSequence> load_manifest(const std::filesystem::path& manifest_path);

/// Writes a corpus to `dir` as PNG frames + landmark CSVs + manifest.jsonl;
/// returns the manifest path.
std::filesystem::path write_corpus(const std::filesystem::path& dir,
                                   const std::vector<VideoSequence>& sequences);

}  // namespace fer
