#pragma once

#include <array>
#include <string>
#include <vector>

namespace fer {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// The 68-point facial landmark set in the standard multi-PIE/iBUG layout:
/// jaw 0-16, right eyebrow 17-21, left eyebrow 22-26, nose 27-35, right eye
/// 36-41, left eye 42-47, mouth 48-67. "Left"/"right" are the subject's.
struct Landmarks68 {
    std::array<Point, 68> pts{};

    bool all_finite() const;
};

enum class Part : int {
    Face = 0,
    Mouth,
    LeftEye,
    RightEye,
    LeftEyebrow,
    RightEyebrow,
    Nose,
    Jaw,
};
constexpr int kPartCount = 8;

enum class RepKind : int { Appearance = 0, Shape = 1 };

/// Geometry of one face-part representation: which landmark indices define
/// it, how much the bounding box is padded, the fixed target raster size,
/// and which representation kinds it offers.
struct PartSpec {
    Part part;
    int first = 0, last = 0;  // inclusive landmark index range
    double padding = 0.10;    // fraction of box extent added per side
    int target_w = 0, target_h = 0;
    bool has_appearance = true;
    bool has_shape = true;
};

const PartSpec& part_spec(Part part);
const std::array<PartSpec, kPartCount>& part_catalog();
std::string part_name(Part part);
Part part_from_name(const std::string& name);

/// One of the 15 pool inputs: a (part, kind) pair.
struct RepId {
    Part part;
    RepKind kind;

    bool operator==(const RepId&) const = default;
};

constexpr int kRepresentationCount = 15;

/// Canonical order: the 7 appearance representations (face, mouth, left eye,
/// right eye, left eyebrow, right eyebrow, nose), then the 8 shape ones
/// (same parts plus jaw).
const std::array<RepId, kRepresentationCount>& all_representations();
int rep_index(RepId id);
std::string rep_name(RepId id);
RepId rep_from_name(const std::string& name);

/// Landmark subset for a part, in order.
std::vector<Point> part_points(const Landmarks68& lm, const PartSpec& spec);

}  // namespace fer
