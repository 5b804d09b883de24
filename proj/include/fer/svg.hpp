#pragma once

#include <filesystem>
#include <sstream>
#include <string>

namespace fer {

/// Minimal SVG document builder for the report exports.
class SvgDoc {
public:
    SvgDoc(int width, int height);

    void rect(double x, double y, double w, double h, const std::string& fill,
              const std::string& stroke = "", double stroke_width = 0.0);
    void text(double x, double y, const std::string& content, int font_size = 12,
              const std::string& anchor = "start");
    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              double width = 1.0);

    std::string str() const;
    void save(const std::filesystem::path& path) const;

private:
    int width_, height_;
    std::ostringstream body_;
};

/// Color for class index 1..7 (anger..neutral).
std::string class_color(int cls);

}  // namespace fer
