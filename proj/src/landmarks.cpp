#include "fer/landmarks.hpp"

#include <cmath>

#include "fer/error.hpp"

namespace fer {

bool Landmarks68::all_finite() const {
    for (const auto& p : pts)
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) return false;
    return true;
}

namespace {

// Target sizes are fixed: face 200x200, mouth 80x50, eye 60x30,
// eyebrow 100x30, nose 60x100, jaw 200x170 (width x height).
const std::array<PartSpec, kPartCount> kCatalog = {{
    {Part::Face, 0, 67, 0.10, 200, 200, true, true},
    {Part::Mouth, 48, 67, 0.10, 80, 50, true, true},
    {Part::LeftEye, 42, 47, 0.10, 60, 30, true, true},
    {Part::RightEye, 36, 41, 0.10, 60, 30, true, true},
    {Part::LeftEyebrow, 22, 26, 0.10, 100, 30, true, true},
    {Part::RightEyebrow, 17, 21, 0.10, 100, 30, true, true},
    {Part::Nose, 27, 35, 0.10, 60, 100, true, true},
    {Part::Jaw, 0, 16, 0.10, 200, 170, false, true},
}};

const std::array<RepId, kRepresentationCount> kReps = {{
    {Part::Face, RepKind::Appearance},
    {Part::Mouth, RepKind::Appearance},
    {Part::LeftEye, RepKind::Appearance},
    {Part::RightEye, RepKind::Appearance},
    {Part::LeftEyebrow, RepKind::Appearance},
    {Part::RightEyebrow, RepKind::Appearance},
    {Part::Nose, RepKind::Appearance},
    {Part::Face, RepKind::Shape},
    {Part::Mouth, RepKind::Shape},
    {Part::LeftEye, RepKind::Shape},
    {Part::RightEye, RepKind::Shape},
    {Part::LeftEyebrow, RepKind::Shape},
    {Part::RightEyebrow, RepKind::Shape},
    {Part::Nose, RepKind::Shape},
    {Part::Jaw, RepKind::Shape},
}};

}  // namespace

const PartSpec& part_spec(Part part) { return kCatalog[static_cast<int>(part)]; }
const std::array<PartSpec, kPartCount>& part_catalog() { return kCatalog; }

std::string part_name(Part part) {
    switch (part) {
        case Part::Face: return "face";
        case Part::Mouth: return "mouth";
        case Part::LeftEye: return "left_eye";
        case Part::RightEye: return "right_eye";
        case Part::LeftEyebrow: return "left_eyebrow";
        case Part::RightEyebrow: return "right_eyebrow";
        case Part::Nose: return "nose";
        case Part::Jaw: return "jaw";
    }
    throw config_error("unknown part enum value");
}

Part part_from_name(const std::string& name) {
    for (const auto& spec : kCatalog)
        if (part_name(spec.part) == name) return spec.part;
    throw config_error("unknown part name '" + name + "'");
}

const std::array<RepId, kRepresentationCount>& all_representations() { return kReps; }

int rep_index(RepId id) {
    for (int i = 0; i < kRepresentationCount; ++i)
        if (kReps[static_cast<std::size_t>(i)] == id) return i;
    throw config_error("representation " + part_name(id.part) + "/" +
                       (id.kind == RepKind::Appearance ? "appearance" : "shape") + " does not exist");
}

std::string rep_name(RepId id) {
    return part_name(id.part) + (id.kind == RepKind::Appearance ? "_app" : "_shape");
}

RepId rep_from_name(const std::string& name) {
    for (const auto& id : kReps)
        if (rep_name(id) == name) return id;
    throw config_error("unknown representation name '" + name + "' (e.g. face_app, jaw_shape)");
}

std::vector<Point> part_points(const Landmarks68& lm, const PartSpec& spec) {
    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>(spec.last - spec.first + 1));
    for (int i = spec.first; i <= spec.last; ++i) pts.push_back(lm.pts[static_cast<std::size_t>(i)]);
    return pts;
}

}  // namespace fer
