#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fer/dataset.hpp"
#include "fer/losses.hpp"
#include "fer/synthetic.hpp"
#include "fer/training.hpp"

namespace fer {

/// Merged run configuration: config-file keys and CLI flags are bijective
/// (key `lambda_t` <-> flag `--lambda-t`); flags override file values.
/// Unknown file keys are rejected.
struct RunConfig {
    // data
    std::string manifest;
    double alpha = 0.1;
    double beta = 0.7;

    // split
    std::uint64_t seed = 0;
    double train_frac = 0.70;
    double val_frac = 0.15;
    double test_frac = 0.15;

    // objective & optimization
    double lambda_t = 0.0;
    double lambda_c = 0.0;
    double lambda_r = 0.0;
    double lr = 0.001;
    int batch = 96;
    int patience = 5;
    int max_epochs = 50;
    int warmup = 0;
    std::string normalization = "per-batch";  // or "raw-sum"
    std::vector<std::string> networks;        // empty = all 15
    std::string monitor = "face_app";

    // execution & IO
    int threads = 1;
    std::string out = "out";
    std::vector<std::string> checkpoints;
    std::string classifier = "face_app";  // timeline/report classifier
    std::string video;                    // timeline video id
    std::vector<std::string> parts{"mouth", "nose"};  // occlusion targets
    std::string grid_axes = "t";
    std::vector<double> grid_values{1e-10, 1e-8, 1e-7, 1e-6, 1e-4, 1e-2};

    // synthetic corpus
    int synth_videos_per_class = 10;
    int synth_min_frames = 10;
    int synth_max_frames = 16;
    int synth_image_size = 96;
    double synth_landmark_noise = 0.25;
    double synth_pixel_noise = 0.015;
    double synth_video_jitter = 2.0;
    double synth_scale_jitter = 0.04;

    /// Applies a parsed config file; rejects unknown keys.
    void apply_json_text(const std::string& json_text);

    /// Validated view as module configs.
    SplitConfig split_config() const;
    TrainConfig train_config() const;
    SyntheticConfig synthetic_config() const;
    LossWeights lambdas() const;
    GridSpec grid_spec() const;

    /// Output directory honoring the FER_OUT_ROOT environment variable.
    std::filesystem::path out_dir() const;

    void validate() const;
};

}  // namespace fer
