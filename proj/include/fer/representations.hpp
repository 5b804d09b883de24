#pragma once

#include <array>
#include <string>
#include <vector>

#include "fer/image.hpp"
#include "fer/landmarks.hpp"

namespace fer {

/// One fixed-size network input: an appearance crop or a shape sketch of a
/// face part. Pixel values are in [0,1] and dims match the PartSpec target.
struct RepresentationImage {
    RepId id{Part::Face, RepKind::Appearance};
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Axis-aligned box, inclusive of its real-valued corners.
struct BBox {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
};

/// Bounding box of a part's landmark subset. A dimension with zero extent is
/// widened to one pixel around the points so single-row/column parts stay
/// croppable and sketchable.
BBox part_bbox(const Landmarks68& lm, const PartSpec& spec);

/// part_bbox expanded by the spec's padding fraction on each side.
BBox padded_part_bbox(const Landmarks68& lm, const PartSpec& spec);

/// Integer pixel rectangle (inclusive) covered by `box` inside an image.
/// Throws the degenerate-box data error when the box misses the image.
struct PixelRect {
    int x0, y0, x1, y1;
};
PixelRect clamp_box_to_image(const BBox& box, int width, int height,
                             const PartSpec& spec, const std::string& frame);

/// Appearance representation: padded bounding-box crop, clamped to the image,
/// bilinearly resized to the part's target size.
RepresentationImage crop_part(const ImageF& image, const Landmarks68& lm, const PartSpec& spec,
                              const std::string& frame = "");

/// Shape representation: black background, the part's landmarks affinely
/// mapped from their padded box onto the target grid, one filled unit disc
/// per landmark. Depends on the landmarks only.
RepresentationImage render_shape_sketch(const Landmarks68& lm, const PartSpec& spec,
                                        const std::string& frame = "");

int sketch_disc_radius(const PartSpec& spec);

/// All 15 representations in canonical order (7 appearance then 8 shape).
std::array<RepresentationImage, kRepresentationCount> make_all_representations(
    const ImageF& image, const Landmarks68& lm, const std::string& frame = "");

RepresentationImage make_representation(const ImageF& image, const Landmarks68& lm, RepId id,
                                        const std::string& frame = "");

/// Blacks out the part's padded box in a copy of the source image. The
/// landmarks are untouched, so shape sketches are unaffected by occlusion.
ImageF apply_occlusion(const ImageF& image, const Landmarks68& lm, const PartSpec& spec,
                       const std::string& frame = "");

}  // namespace fer
