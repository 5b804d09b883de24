#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "fer/error.hpp"
#include "fer/representations.hpp"
#include "fer/rng.hpp"
#include "fer/synthetic.hpp"

using namespace fer;

namespace {

/// Landmarks spread over a w x h image so every part box is non-degenerate.
Landmarks68 spread_landmarks(int w, int h) {
    return neutral_template(std::min(w, h));
}

ImageF gradient_image(int w, int h) {
    ImageF img = make_imagef(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) img.at(x, y) = (x + y) / static_cast<double>(w + h);
    return img;
}

int count_connected_components(const RepresentationImage& img) {
    std::vector<char> seen(img.pixels.size(), 0);
    int components = 0;
    for (int start = 0; start < static_cast<int>(img.pixels.size()); ++start) {
        if (seen[static_cast<std::size_t>(start)] || img.pixels[static_cast<std::size_t>(start)] == 0.0)
            continue;
        ++components;
        std::vector<int> stack{start};
        seen[static_cast<std::size_t>(start)] = 1;
        while (!stack.empty()) {
            const int idx = stack.back();
            stack.pop_back();
            const int x = idx % img.width, y = idx / img.width;
            const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
            for (int d = 0; d < 4; ++d) {
                const int nx = x + dx[d], ny = y + dy[d];
                if (nx < 0 || ny < 0 || nx >= img.width || ny >= img.height) continue;
                const int nidx = ny * img.width + nx;
                if (!seen[static_cast<std::size_t>(nidx)] && img.pixels[static_cast<std::size_t>(nidx)] > 0.0) {
                    seen[static_cast<std::size_t>(nidx)] = 1;
                    stack.push_back(nidx);
                }
            }
        }
    }
    return components;
}

}  // namespace

TEST_CASE("face crop has the 200x200 target size") {
    auto lm = spread_landmarks(96, 96);
    auto img = gradient_image(96, 96);
    auto rep = crop_part(img, lm, part_spec(Part::Face));
    CHECK(rep.width == 200);
    CHECK(rep.height == 200);
    for (double v : rep.pixels) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("all 15 representations have the catalog target sizes") {
    auto lm = spread_landmarks(96, 96);
    auto img = gradient_image(96, 96);
    auto reps = make_all_representations(img, lm);
    int appearance = 0, shape = 0;
    for (const auto& rep : reps) {
        const auto& spec = part_spec(rep.id.part);
        CHECK(rep.width == spec.target_w);
        CHECK(rep.height == spec.target_h);
        (rep.id.kind == RepKind::Appearance ? appearance : shape) += 1;
    }
    CHECK(appearance == 7);
    CHECK(shape == 8);
    // Size table: face 200x200, mouth 80x50, eye 60x30, eyebrow 100x30,
    // nose 60x100, jaw 200x170.
    CHECK(part_spec(Part::Mouth).target_w == 80);
    CHECK(part_spec(Part::Mouth).target_h == 50);
    CHECK(part_spec(Part::LeftEye).target_w == 60);
    CHECK(part_spec(Part::LeftEye).target_h == 30);
    CHECK(part_spec(Part::LeftEyebrow).target_w == 100);
    CHECK(part_spec(Part::LeftEyebrow).target_h == 30);
    CHECK(part_spec(Part::Nose).target_w == 60);
    CHECK(part_spec(Part::Nose).target_h == 100);
    CHECK(part_spec(Part::Jaw).target_w == 200);
    CHECK(part_spec(Part::Jaw).target_h == 170);
}

TEST_CASE("landmarks spanning the whole image with zero padding crop the whole image") {
    ImageF img = gradient_image(40, 30);
    Landmarks68 lm;
    Rng rng(3);
    for (auto& p : lm.pts) p = {rng.uniform(0.0, 39.0), rng.uniform(0.0, 29.0)};
    lm.pts[0] = {0, 0};
    lm.pts[1] = {39, 29};

    PartSpec spec = part_spec(Part::Face);
    spec.padding = 0.0;
    auto rep = crop_part(img, lm, spec);
    auto direct = bilinear_resize(img, spec.target_w, spec.target_h);
    CHECK(rep.pixels == direct.pixels);
}

TEST_CASE("a bright rectangle under the mouth raises the mouth crop mean") {
    auto lm = spread_landmarks(96, 96);
    ImageF img = make_imagef(96, 96, 0.05);
    // Paint a bright patch over the mouth landmark area.
    BBox mouth = part_bbox(lm, part_spec(Part::Mouth));
    for (int y = static_cast<int>(mouth.y0); y <= static_cast<int>(mouth.y1); ++y)
        for (int x = static_cast<int>(mouth.x0); x <= static_cast<int>(mouth.x1); ++x)
            img.at(x, y) = 0.95;

    auto mouth_rep = crop_part(img, lm, part_spec(Part::Mouth));
    auto face_rep = crop_part(img, lm, part_spec(Part::Face));
    auto mean = [](const RepresentationImage& r) {
        double s = 0.0;
        for (double v : r.pixels) s += v;
        return s / static_cast<double>(r.pixels.size());
    };
    CHECK(mean(mouth_rep) > mean(face_rep));
}

TEST_CASE("crop errors when the part lies outside the image") {
    ImageF img = gradient_image(60, 60);
    Landmarks68 lm = spread_landmarks(96, 96);
    for (int i = 48; i <= 67; ++i) lm.pts[static_cast<std::size_t>(i)].y += 500.0;  // mouth far below
    CHECK_THROWS_WITH_AS((void)crop_part(img, lm, part_spec(Part::Mouth), "f1"),
                         doctest::Contains("mouth"), Error);
}

TEST_CASE("mouth sketch draws exactly 20 discs") {
    // Spread the mouth points far apart so discs stay disjoint.
    Landmarks68 lm = spread_landmarks(96, 96);
    int idx = 0;
    for (int gy = 0; gy < 4; ++gy)
        for (int gx = 0; gx < 5; ++gx)
            lm.pts[static_cast<std::size_t>(48 + idx++)] = {10.0 + gx * 18.0, 10.0 + gy * 22.0};
    auto sketch = render_shape_sketch(lm, part_spec(Part::Mouth));
    CHECK(count_connected_components(sketch) == 20);
}

TEST_CASE("jaw sketch has 17 discs on a 200x170 grid") {
    auto lm = spread_landmarks(96, 96);
    auto sketch = render_shape_sketch(lm, part_spec(Part::Jaw));
    CHECK(sketch.width == 200);
    CHECK(sketch.height == 170);
    CHECK(count_connected_components(sketch) == 17);
}

TEST_CASE("collinear landmarks sketch onto a single row band") {
    Landmarks68 lm = spread_landmarks(96, 96);
    for (int i = 48; i <= 67; ++i)
        lm.pts[static_cast<std::size_t>(i)] = {10.0 + 3.0 * (i - 48), 40.0};  // one horizontal line
    auto sketch = render_shape_sketch(lm, part_spec(Part::Mouth));
    // All discs share one center row: the vertical extent of lit pixels is
    // bounded by one disc diameter.
    int min_y = sketch.height, max_y = -1;
    for (int y = 0; y < sketch.height; ++y)
        for (int x = 0; x < sketch.width; ++x)
            if (sketch.at(x, y) > 0.0) {
                min_y = std::min(min_y, y);
                max_y = std::max(max_y, y);
            }
    CHECK(max_y - min_y <= 2 * sketch_disc_radius(part_spec(Part::Mouth)));
}

TEST_CASE("shape sketches depend only on landmarks") {
    auto lm = spread_landmarks(96, 96);
    auto img1 = gradient_image(96, 96);
    ImageF img2 = make_imagef(96, 96, 0.7);
    auto reps1 = make_all_representations(img1, lm);
    auto reps2 = make_all_representations(img2, lm);
    for (int i = 0; i < kRepresentationCount; ++i) {
        const auto& a = reps1[static_cast<std::size_t>(i)];
        const auto& b = reps2[static_cast<std::size_t>(i)];
        if (a.id.kind == RepKind::Shape)
            CHECK(a.pixels == b.pixels);
        else
            CHECK(a.pixels != b.pixels);
    }
}

TEST_CASE("make_all_representations is deterministic") {
    auto lm = spread_landmarks(96, 96);
    auto img = gradient_image(96, 96);
    auto a = make_all_representations(img, lm);
    auto b = make_all_representations(img, lm);
    for (int i = 0; i < kRepresentationCount; ++i)
        CHECK(a[static_cast<std::size_t>(i)].pixels == b[static_cast<std::size_t>(i)].pixels);
}

TEST_CASE("integer translation of landmarks and image leaves sketches unchanged") {
    const int shift = 7;
    auto lm = spread_landmarks(80, 80);
    ImageF img = make_imagef(120, 120, 0.0);
    for (int y = 0; y < 80; ++y)
        for (int x = 0; x < 80; ++x) img.at(x, y) = ((x * 13 + y * 7) % 50) / 50.0;

    Landmarks68 lm2 = lm;
    ImageF img2 = make_imagef(120, 120, 0.0);
    for (auto& p : lm2.pts) {
        p.x += shift;
        p.y += shift;
    }
    for (int y = 0; y < 80; ++y)
        for (int x = 0; x < 80; ++x) img2.at(x + shift, y + shift) = img.at(x, y);

    for (const auto& id : all_representations()) {
        if (id.kind != RepKind::Shape) continue;
        auto a = make_representation(img, lm, id);
        auto b = make_representation(img2, lm2, id);
        CHECK(a.pixels == b.pixels);
    }
}

TEST_CASE("occluding the mouth leaves its sketch identical and its crop black") {
    auto lm = spread_landmarks(96, 96);
    auto img = gradient_image(96, 96);
    auto occluded = apply_occlusion(img, lm, part_spec(Part::Mouth));

    auto sketch_before = render_shape_sketch(lm, part_spec(Part::Mouth));
    auto sketch_after = render_shape_sketch(lm, part_spec(Part::Mouth));
    CHECK(sketch_before.pixels == sketch_after.pixels);

    auto crop = crop_part(occluded, lm, part_spec(Part::Mouth));
    for (double v : crop.pixels) CHECK(v == 0.0);
}

TEST_CASE("occluding the nose changes the face crop only inside the nose box") {
    auto lm = spread_landmarks(96, 96);
    auto img = gradient_image(96, 96);
    auto occluded = apply_occlusion(img, lm, part_spec(Part::Nose));

    const PixelRect nose = clamp_box_to_image(padded_part_bbox(lm, part_spec(Part::Nose)), 96, 96,
                                              part_spec(Part::Nose), "");
    for (int y = 0; y < 96; ++y)
        for (int x = 0; x < 96; ++x) {
            const bool inside = x >= nose.x0 && x <= nose.x1 && y >= nose.y0 && y <= nose.y1;
            if (inside)
                CHECK(occluded.at(x, y) == 0.0);
            else
                CHECK(occluded.at(x, y) == img.at(x, y));
        }
}

TEST_CASE("occluding the whole face is rejected") {
    auto lm = spread_landmarks(96, 96);
    auto img = gradient_image(96, 96);
    CHECK_THROWS_AS((void)apply_occlusion(img, lm, part_spec(Part::Face)), Error);
}
