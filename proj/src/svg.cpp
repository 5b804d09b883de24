#include "fer/svg.hpp"

#include <fstream>

#include "fer/error.hpp"

namespace fer {

SvgDoc::SvgDoc(int width, int height) : width_(width), height_(height) {}

void SvgDoc::rect(double x, double y, double w, double h, const std::string& fill,
                  const std::string& stroke, double stroke_width) {
    body_ << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << w << "\" height=\"" << h
          << "\" fill=\"" << fill << "\"";
    if (!stroke.empty())
        body_ << " stroke=\"" << stroke << "\" stroke-width=\"" << stroke_width << "\"";
    body_ << "/>\n";
}

void SvgDoc::text(double x, double y, const std::string& content, int font_size,
                  const std::string& anchor) {
    body_ << "<text x=\"" << x << "\" y=\"" << y << "\" font-size=\"" << font_size
          << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\">" << content
          << "</text>\n";
}

void SvgDoc::line(double x1, double y1, double x2, double y2, const std::string& stroke,
                  double width) {
    body_ << "<line x1=\"" << x1 << "\" y1=\"" << y1 << "\" x2=\"" << x2 << "\" y2=\"" << y2
          << "\" stroke=\"" << stroke << "\" stroke-width=\"" << width << "\"/>\n";
}

std::string SvgDoc::str() const {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\""
        << height_ << "\" viewBox=\"0 0 " << width_ << " " << height_ << "\">\n"
        << body_.str() << "</svg>\n";
    return out.str();
}

void SvgDoc::save(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw data_error("cannot write SVG '" + path.string() + "'");
    f << str();
}

std::string class_color(int cls) {
    switch (cls) {
        case 1: return "#d62728";  // anger
        case 2: return "#9467bd";  // disgust
        case 3: return "#8c564b";  // fear
        case 4: return "#2ca02c";  // happiness
        case 5: return "#1f77b4";  // sadness
        case 6: return "#ff7f0e";  // surprise
        case 7: return "#7f7f7f";  // neutral
    }
    return "#000000";
}

}  // namespace fer
