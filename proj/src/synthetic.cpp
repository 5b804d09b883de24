#include "fer/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "fer/error.hpp"
#include "fer/rng.hpp"

namespace fer {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Reference geometry lives in a 200x200 box and is scaled to the image size.
// Indices follow the iBUG layout declared in landmarks.hpp.
std::array<Point, 68> reference_neutral() {
    std::array<Point, 68> p{};
    // Jaw arc 0-16.
    for (int i = 0; i <= 16; ++i) {
        const double a = i * kPi / 16.0;
        p[static_cast<std::size_t>(i)] = {100.0 - 70.0 * std::cos(a), 80.0 + 100.0 * std::sin(a)};
    }
    // Right eyebrow 17-21 (subject's right, viewer's left).
    p[17] = {38, 70};
    p[18] = {50, 65};
    p[19] = {62, 62};
    p[20] = {74, 64};
    p[21] = {86, 68};
    // Left eyebrow 22-26.
    p[22] = {114, 68};
    p[23] = {126, 64};
    p[24] = {138, 62};
    p[25] = {150, 65};
    p[26] = {162, 70};
    // Nose bridge 27-30 and base 31-35.
    p[27] = {100, 80};
    p[28] = {100, 92};
    p[29] = {100, 104};
    p[30] = {100, 116};
    p[31] = {84, 124};
    p[32] = {92, 127};
    p[33] = {100, 130};
    p[34] = {108, 127};
    p[35] = {116, 124};
    // Right eye 36-41.
    p[36] = {50, 82};
    p[37] = {58, 77};
    p[38] = {70, 77};
    p[39] = {78, 82};
    p[40] = {70, 87};
    p[41] = {58, 87};
    // Left eye 42-47.
    p[42] = {122, 82};
    p[43] = {130, 77};
    p[44] = {142, 77};
    p[45] = {150, 82};
    p[46] = {142, 87};
    p[47] = {130, 87};
    // Mouth: outer ring 48-59 (width 22, closed lips, height 7), inner ring
    // 60-67 (width 14, height 2).
    for (int k = 0; k < 12; ++k) {
        const double a = kPi + k * (2.0 * kPi / 12.0);
        p[static_cast<std::size_t>(48 + k)] = {100.0 + 22.0 * std::cos(a), 155.0 + 7.0 * std::sin(a)};
    }
    for (int k = 0; k < 8; ++k) {
        const double a = kPi + k * (2.0 * kPi / 8.0);
        p[static_cast<std::size_t>(60 + k)] = {100.0 + 14.0 * std::cos(a), 155.0 + 2.0 * std::sin(a)};
    }
    return p;
}

bool is_upper_mouth(int i) { return (i >= 49 && i <= 53) || (i >= 61 && i <= 63); }
bool is_lower_mouth(int i) { return (i >= 55 && i <= 59) || (i >= 65 && i <= 67); }
bool is_mouth_corner(int i) { return i == 48 || i == 54 || i == 60 || i == 64; }

std::array<Point, 68> reference_expression(Label emotion) {
    std::array<Point, 68> p = reference_neutral();
    auto move = [&](int i, double dx, double dy) {
        p[static_cast<std::size_t>(i)].x += dx;
        p[static_cast<std::size_t>(i)].y += dy;
    };
    auto widen_mouth = [&](double dw) {
        for (int i : {48, 60}) move(i, -dw, 0);
        for (int i : {54, 64}) move(i, dw, 0);
    };
    auto open_mouth = [&](double outer, double inner) {
        for (int i = 48; i <= 67; ++i) {
            if (is_upper_mouth(i)) move(i, 0, i >= 60 ? -inner : -outer);
            if (is_lower_mouth(i)) move(i, 0, i >= 60 ? inner : outer);
        }
    };

    switch (emotion) {
        case Label::happiness:
            // Only the mouth departs from neutral: raised, widened corners.
            for (int i = 48; i <= 67; ++i)
                if (is_mouth_corner(i)) move(i, (i == 48 || i == 60) ? -6 : 6, -12);
            open_mouth(3, 1.5);
            break;
        case Label::sadness:
            // Mouth corners droop; inner eyebrow ends rise.
            for (int i = 48; i <= 67; ++i)
                if (is_mouth_corner(i)) move(i, 0, 10);
            move(21, 0, -7);
            move(22, 0, -7);
            move(20, 0, -4);
            move(23, 0, -4);
            break;
        case Label::surprise: {
            // Jaw drop, wide eyes, raised eyebrows.
            open_mouth(12, 9);
            widen_mouth(-4);
            for (int i = 6; i <= 10; ++i) move(i, 0, 10);
            for (int i : {37, 38, 43, 44}) move(i, 0, -5);
            for (int i : {40, 41, 46, 47}) move(i, 0, 5);
            for (int i = 17; i <= 26; ++i) move(i, 0, -10);
            break;
        }
        case Label::fear:
            // Brows up and pulled together, eyes widened, lips parted.
            for (int i = 17; i <= 21; ++i) move(i, 4, -6);
            for (int i = 22; i <= 26; ++i) move(i, -4, -6);
            for (int i : {37, 38, 43, 44}) move(i, 0, -3);
            for (int i : {40, 41, 46, 47}) move(i, 0, 3);
            open_mouth(5, 3);
            widen_mouth(3);
            break;
        case Label::anger:
            // Brows down and together, narrowed eyes, tightened mouth.
            for (int i = 17; i <= 21; ++i) move(i, 3, 6 + (21 - i));
            for (int i = 22; i <= 26; ++i) move(i, -3, 6 + (i - 22));
            for (int i : {37, 38, 43, 44}) move(i, 0, 2);
            widen_mouth(-5);
            break;
        case Label::disgust:
            // Wrinkled nose (raised base), raised upper lip, lowered brows.
            for (int i = 31; i <= 35; ++i) move(i, 0, -7);
            move(29, 0, -3);
            move(30, 0, -5);
            for (int i = 48; i <= 67; ++i)
                if (is_upper_mouth(i)) move(i, 0, -6);
            for (int i = 17; i <= 26; ++i) move(i, 0, 3);
            break;
        default:
            throw config_error("expression_template: '" + label_name(emotion) + "' is not an emotion");
    }
    return p;
}

Landmarks68 scaled(const std::array<Point, 68>& ref, int image_size) {
    // Reference box 200x200 -> image with a small margin.
    const double s = image_size / 200.0;
    Landmarks68 lm;
    for (std::size_t i = 0; i < 68; ++i) lm.pts[i] = {ref[i].x * s, ref[i].y * s * 0.92 + 0.02 * image_size};
    return lm;
}

}  // namespace

Landmarks68 neutral_template(int image_size) { return scaled(reference_neutral(), image_size); }

Landmarks68 expression_template(Label emotion, int image_size) {
    return scaled(reference_expression(emotion), image_size);
}

ImageF render_synthetic_face(const Landmarks68& lm, int image_size) {
    ImageF img = make_imagef(image_size, image_size, 0.0);
    const double s = image_size / 200.0;

    // Skin: one broad elliptic bump centered between the eyes and the chin.
    const double cx = 0.5 * (lm.pts[0].x + lm.pts[16].x);
    const double cy = 0.5 * (lm.pts[27].y + lm.pts[8].y);
    const double rx = 0.62 * (lm.pts[16].x - lm.pts[0].x);
    const double ry = 0.75 * (lm.pts[8].y - lm.pts[27].y) + 0.25 * image_size;

    struct Bump {
        double x, y, sigma, amp;
    };
    std::vector<Bump> bumps;
    auto add_group = [&](int first, int last, double sigma, double amp) {
        for (int i = first; i <= last; ++i)
            bumps.push_back({lm.pts[static_cast<std::size_t>(i)].x, lm.pts[static_cast<std::size_t>(i)].y,
                             sigma * s, amp});
    };
    add_group(0, 16, 4.0, 0.18);    // jaw line
    add_group(17, 26, 2.2, 0.55);   // eyebrows
    add_group(27, 35, 2.4, 0.40);   // nose
    add_group(36, 47, 2.0, 0.60);   // eyes
    add_group(48, 67, 2.2, 0.70);   // mouth

    for (int y = 0; y < image_size; ++y) {
        for (int x = 0; x < image_size; ++x) {
            const double ex = (x - cx) / rx;
            const double ey = (y - cy) / ry;
            double v = 0.35 * std::exp(-2.0 * (ex * ex + ey * ey));
            for (const auto& b : bumps) {
                const double dx = x - b.x, dy = y - b.y;
                const double d2 = dx * dx + dy * dy;
                if (d2 < 25.0 * b.sigma * b.sigma) v += b.amp * std::exp(-d2 / (2.0 * b.sigma * b.sigma));
            }
            img.at(x, y) = std::min(1.0, v);
        }
    }
    return img;
}

std::vector<VideoSequence> generate_synthetic_corpus(const SyntheticConfig& config) {
    if (config.min_frames < 10 || config.max_frames > 60 || config.min_frames > config.max_frames)
        throw config_error("synthetic frame counts must lie within [10, 60]");
    if (config.videos_per_class < 1) throw config_error("videos_per_class must be >= 1");
    if (config.image_size < 32) throw config_error("synthetic image_size must be >= 32");

    std::vector<VideoSequence> corpus;
    const Landmarks68 neutral = neutral_template(config.image_size);
    const double margin = 4.0;

    for (std::size_t c = 0; c < kEmotions.size(); ++c) {
        const Label emotion = kEmotions[c];
        const Landmarks68 target = expression_template(emotion, config.image_size);
        for (int v = 0; v < config.videos_per_class; ++v) {
            // One independent stream per video: corpora with more videos per
            // class extend, not reshuffle, the smaller ones.
            Rng rng(derive_seed(config.seed, 100 + c * 1000 + static_cast<std::uint64_t>(v)));
            VideoSequence video;
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%s_%02d", label_name(emotion).c_str(), v);
            video.id = buf;
            video.video_label = emotion;

            const int frames = rng.uniform_int(config.min_frames, config.max_frames);
            const double scale = 1.0 + rng.uniform(-config.video_scale_jitter, config.video_scale_jitter);
            const double tx = rng.uniform(-config.video_jitter, config.video_jitter);
            const double ty = rng.uniform(-config.video_jitter, config.video_jitter);
            const double cx = config.image_size / 2.0, cy = config.image_size / 2.0;

            for (int t = 1; t <= frames; ++t) {
                const double s = frames > 1 ? static_cast<double>(t - 1) / (frames - 1) : 1.0;
                FrameRecord frame;
                frame.video_id = video.id;
                frame.t = t;
                for (std::size_t i = 0; i < 68; ++i) {
                    const double lx = neutral.pts[i].x + s * (target.pts[i].x - neutral.pts[i].x);
                    const double ly = neutral.pts[i].y + s * (target.pts[i].y - neutral.pts[i].y);
                    double px = cx + (lx - cx) * scale + tx + rng.normal(0.0, config.landmark_noise);
                    double py = cy + (ly - cy) * scale + ty + rng.normal(0.0, config.landmark_noise);
                    px = std::clamp(px, margin, config.image_size - 1.0 - margin);
                    py = std::clamp(py, margin, config.image_size - 1.0 - margin);
                    frame.landmarks.pts[i] = {px, py};
                }
                ImageF rendered = render_synthetic_face(frame.landmarks, config.image_size);
                if (config.pixel_noise > 0.0)
                    for (auto& p : rendered.pixels)
                        p = std::clamp(p + rng.normal(0.0, config.pixel_noise), 0.0, 1.0);
                frame.pixels = quantize(rendered);
                video.frames.push_back(std::move(frame));
            }
            corpus.push_back(std::move(video));
        }
    }
    return corpus;
}

}  // namespace fer
