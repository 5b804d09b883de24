#pragma once

#include <cstdint>

#include "fer/dataset.hpp"

namespace fer {

/// Configuration of the desk-scale synthetic corpus. Each video interpolates
/// the landmark geometry from a neutral template (first frame) to one of six
/// expression templates (last frame); pixels are rendered as smooth
/// landmark-anchored intensity blobs plus noise.
struct SyntheticConfig {
    int videos_per_class = 10;
    int min_frames = 10;   // must stay within [10, 60]
    int max_frames = 16;
    int image_size = 96;
    double landmark_noise = 0.25;  // per-frame landmark jitter, source pixels
    double pixel_noise = 0.015;    // additive intensity noise, [0,1] scale
    double video_jitter = 2.0;     // per-video translation bound, source pixels
    double video_scale_jitter = 0.04;
    std::uint64_t seed = 0;
};

/// Neutral landmark geometry scaled to an image_size x image_size frame.
Landmarks68 neutral_template(int image_size);

/// Full-intensity (s=1) expression geometry for one of the six emotions.
/// The happiness template differs from neutral only inside the mouth region,
/// which makes the mouth the class-discriminative area for occlusion studies.
Landmarks68 expression_template(Label emotion, int image_size);

/// Renders the face image for a landmark set (no noise).
ImageF render_synthetic_face(const Landmarks68& lm, int image_size);

/// Deterministic corpus: 6 classes x videos_per_class clips. Frame labels are
/// not assigned here; pass the result through build_semisupervised_dataset.
std::vector<VideoSequence> generate_synthetic_corpus(const SyntheticConfig& config);

}  // namespace fer
