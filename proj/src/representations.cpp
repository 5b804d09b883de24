#include "fer/representations.hpp"

#include <algorithm>
#include <cmath>

#include "fer/error.hpp"

namespace fer {

namespace {

std::string frame_suffix(const std::string& frame) {
    return frame.empty() ? "" : " (frame " + frame + ")";
}

}  // namespace

BBox part_bbox(const Landmarks68& lm, const PartSpec& spec) {
    if (!lm.all_finite()) throw data_error("landmarks contain non-finite coordinates");
    BBox box{1e300, 1e300, -1e300, -1e300};
    for (int i = spec.first; i <= spec.last; ++i) {
        const Point& p = lm.pts[static_cast<std::size_t>(i)];
        box.x0 = std::min(box.x0, p.x);
        box.y0 = std::min(box.y0, p.y);
        box.x1 = std::max(box.x1, p.x);
        box.y1 = std::max(box.y1, p.y);
    }
    if (box.width() == 0.0) {
        box.x0 -= 0.5;
        box.x1 += 0.5;
    }
    if (box.height() == 0.0) {
        box.y0 -= 0.5;
        box.y1 += 0.5;
    }
    return box;
}

BBox padded_part_bbox(const Landmarks68& lm, const PartSpec& spec) {
    BBox box = part_bbox(lm, spec);
    const double dx = spec.padding * box.width();
    const double dy = spec.padding * box.height();
    return {box.x0 - dx, box.y0 - dy, box.x1 + dx, box.y1 + dy};
}

PixelRect clamp_box_to_image(const BBox& box, int width, int height,
                             const PartSpec& spec, const std::string& frame) {
    if (box.x1 < 0.0 || box.y1 < 0.0 || box.x0 > width - 1.0 || box.y0 > height - 1.0)
        throw data_error("degenerate crop box for part '" + part_name(spec.part) +
                         "': landmarks fall outside the image" + frame_suffix(frame));
    PixelRect r;
    r.x0 = std::clamp(static_cast<int>(std::floor(box.x0)), 0, width - 1);
    r.y0 = std::clamp(static_cast<int>(std::floor(box.y0)), 0, height - 1);
    r.x1 = std::clamp(static_cast<int>(std::ceil(box.x1)), 0, width - 1);
    r.y1 = std::clamp(static_cast<int>(std::ceil(box.y1)), 0, height - 1);
    if (r.x1 < r.x0 || r.y1 < r.y0)
        throw data_error("degenerate crop box for part '" + part_name(spec.part) + "'" +
                         frame_suffix(frame));
    return r;
}

RepresentationImage crop_part(const ImageF& image, const Landmarks68& lm, const PartSpec& spec,
                              const std::string& frame) {
    if (!spec.has_appearance)
        throw config_error("part '" + part_name(spec.part) + "' offers no appearance representation");
    const BBox box = padded_part_bbox(lm, spec);
    const PixelRect r = clamp_box_to_image(box, image.width, image.height, spec, frame);

    ImageF crop = make_imagef(r.x1 - r.x0 + 1, r.y1 - r.y0 + 1);
    for (int y = r.y0; y <= r.y1; ++y)
        for (int x = r.x0; x <= r.x1; ++x) crop.at(x - r.x0, y - r.y0) = image.at(x, y);

    ImageF resized = bilinear_resize(crop, spec.target_w, spec.target_h);
    RepresentationImage out;
    out.id = {spec.part, RepKind::Appearance};
    out.width = spec.target_w;
    out.height = spec.target_h;
    out.pixels = std::move(resized.pixels);
    return out;
}

int sketch_disc_radius(const PartSpec& spec) {
    return std::max(1, static_cast<int>(std::lround(std::min(spec.target_w, spec.target_h) / 30.0)));
}

RepresentationImage render_shape_sketch(const Landmarks68& lm, const PartSpec& spec,
                                        const std::string& frame) {
    if (!spec.has_shape)
        throw config_error("part '" + part_name(spec.part) + "' offers no shape representation");
    const BBox box = padded_part_bbox(lm, spec);
    if (!(box.width() > 0.0) || !(box.height() > 0.0))
        throw data_error("degenerate sketch box for part '" + part_name(spec.part) + "'" +
                         frame_suffix(frame));

    RepresentationImage out;
    out.id = {spec.part, RepKind::Shape};
    out.width = spec.target_w;
    out.height = spec.target_h;
    out.pixels.assign(static_cast<std::size_t>(spec.target_w) * spec.target_h, 0.0);

    const double sx = (spec.target_w - 1) / box.width();
    const double sy = (spec.target_h - 1) / box.height();
    const int radius = sketch_disc_radius(spec);
    const double r2 = static_cast<double>(radius) * radius;

    for (int i = spec.first; i <= spec.last; ++i) {
        const Point& p = lm.pts[static_cast<std::size_t>(i)];
        const double cx = (p.x - box.x0) * sx;
        const double cy = (p.y - box.y0) * sy;
        const int px0 = std::max(0, static_cast<int>(std::floor(cx - radius)));
        const int px1 = std::min(spec.target_w - 1, static_cast<int>(std::ceil(cx + radius)));
        const int py0 = std::max(0, static_cast<int>(std::floor(cy - radius)));
        const int py1 = std::min(spec.target_h - 1, static_cast<int>(std::ceil(cy + radius)));
        for (int y = py0; y <= py1; ++y)
            for (int x = px0; x <= px1; ++x) {
                const double dx = x - cx, dy = y - cy;
                if (dx * dx + dy * dy <= r2)
                    out.pixels[static_cast<std::size_t>(y) * spec.target_w + x] = 1.0;
            }
    }
    return out;
}

RepresentationImage make_representation(const ImageF& image, const Landmarks68& lm, RepId id,
                                        const std::string& frame) {
    const PartSpec& spec = part_spec(id.part);
    return id.kind == RepKind::Appearance ? crop_part(image, lm, spec, frame)
                                          : render_shape_sketch(lm, spec, frame);
}

std::array<RepresentationImage, kRepresentationCount> make_all_representations(
    const ImageF& image, const Landmarks68& lm, const std::string& frame) {
    std::array<RepresentationImage, kRepresentationCount> out;
    const auto& reps = all_representations();
    for (int i = 0; i < kRepresentationCount; ++i)
        out[static_cast<std::size_t>(i)] = make_representation(image, lm, reps[static_cast<std::size_t>(i)], frame);
    return out;
}

ImageF apply_occlusion(const ImageF& image, const Landmarks68& lm, const PartSpec& spec,
                       const std::string& frame) {
    if (spec.part == Part::Face)
        throw config_error("occluding the whole face is not supported");
    const BBox box = padded_part_bbox(lm, spec);
    const PixelRect r = clamp_box_to_image(box, image.width, image.height, spec, frame);
    ImageF out = image;
    for (int y = r.y0; y <= r.y1; ++y)
        for (int x = r.x0; x <= r.x1; ++x) out.at(x, y) = 0.0;  // black, as in the occlusion figures
    return out;
}

}  // namespace fer
