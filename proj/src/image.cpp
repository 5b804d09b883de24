#include "fer/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "fer/error.hpp"

namespace fer {

Image8 make_image8(int width, int height, std::uint8_t fill) {
    if (width <= 0 || height <= 0) throw data_error("image dimensions must be positive");
    Image8 img;
    img.width = width;
    img.height = height;
    img.pixels.assign(static_cast<std::size_t>(width) * height, fill);
    return img;
}

ImageF make_imagef(int width, int height, double fill) {
    if (width <= 0 || height <= 0) throw data_error("image dimensions must be positive");
    ImageF img;
    img.width = width;
    img.height = height;
    img.pixels.assign(static_cast<std::size_t>(width) * height, fill);
    return img;
}

ImageF to_float(const Image8& img) {
    ImageF out;
    out.width = img.width;
    out.height = img.height;
    out.pixels.resize(img.pixels.size());
    for (std::size_t i = 0; i < img.pixels.size(); ++i) out.pixels[i] = img.pixels[i] / 255.0;
    return out;
}

Image8 quantize(const ImageF& img) {
    Image8 out;
    out.width = img.width;
    out.height = img.height;
    out.pixels.resize(img.pixels.size());
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        const double v = std::clamp(img.pixels[i], 0.0, 1.0);
        out.pixels[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
    return out;
}

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

Image8 load_png_file(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.string().c_str(), "rb"));
    if (!fp) throw data_error("cannot open image '" + path.string() + "'");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw data_error("png: allocation failure");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw data_error("png: allocation failure");
    }
    std::vector<png_bytep> rows;
    Image8 img;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw data_error("png: failed to decode '" + path.string() + "'");
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    // Normalize everything to 8-bit grayscale.
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    const png_byte color = png_get_color_type(png, info);
    if (color & PNG_COLOR_MASK_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_COLOR) png_set_rgb_to_gray(png, 1, -1.0, -1.0);
    png_read_update_info(png, info);

    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    rows.resize(static_cast<std::size_t>(img.height));
    for (int y = 0; y < img.height; ++y)
        rows[static_cast<std::size_t>(y)] = img.pixels.data() + static_cast<std::size_t>(y) * img.width;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

int pgm_next_int(std::istream& in, const std::filesystem::path& path) {
    // Skips whitespace and '#' comment lines per the PNM grammar.
    while (true) {
        const int c = in.peek();
        if (c == EOF) throw data_error("pgm: truncated header in '" + path.string() + "'");
        if (c == '#') {
            std::string line;
            std::getline(in, line);
            continue;
        }
        if (std::isspace(c)) {
            in.get();
            continue;
        }
        break;
    }
    int value = 0;
    in >> value;
    if (!in) throw data_error("pgm: bad header in '" + path.string() + "'");
    return value;
}

Image8 load_pgm_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open image '" + path.string() + "'");
    std::string magic(2, '\0');
    in.read(magic.data(), 2);
    if (magic != "P5" && magic != "P2") throw data_error("pgm: unsupported magic in '" + path.string() + "'");
    const int width = pgm_next_int(in, path);
    const int height = pgm_next_int(in, path);
    const int maxval = pgm_next_int(in, path);
    if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255)
        throw data_error("pgm: unsupported geometry or depth in '" + path.string() + "'");

    Image8 img = make_image8(width, height);
    if (magic == "P5") {
        in.get();  // single whitespace after maxval
        in.read(reinterpret_cast<char*>(img.pixels.data()),
                static_cast<std::streamsize>(img.pixels.size()));
        if (!in) throw data_error("pgm: truncated pixel data in '" + path.string() + "'");
    } else {
        for (auto& p : img.pixels) {
            int v = 0;
            in >> v;
            if (!in) throw data_error("pgm: truncated pixel data in '" + path.string() + "'");
            p = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
        }
    }
    return img;
}

}  // namespace

Image8 load_image(const std::filesystem::path& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw data_error("cannot open image '" + path.string() + "'");
    unsigned char sig[2] = {0, 0};
    probe.read(reinterpret_cast<char*>(sig), 2);
    probe.close();
    if (sig[0] == 0x89 && sig[1] == 'P') return load_png_file(path);
    if (sig[0] == 'P' && (sig[1] == '5' || sig[1] == '2')) return load_pgm_file(path);
    throw data_error("unsupported image format in '" + path.string() + "' (need PNG or PGM)");
}

void save_png(const std::filesystem::path& path, const Image8& img) {
    FilePtr fp(std::fopen(path.string().c_str(), "wb"));
    if (!fp) throw data_error("cannot open '" + path.string() + "' for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw data_error("png: allocation failure");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw data_error("png: allocation failure");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw data_error("png: failed to encode '" + path.string() + "'");
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height),
                 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y)
        png_write_row(png, const_cast<png_bytep>(img.pixels.data() + static_cast<std::size_t>(y) * img.width));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

void save_pgm(const std::filesystem::path& path, const Image8& img) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw data_error("cannot open '" + path.string() + "' for writing");
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw data_error("pgm: write failed for '" + path.string() + "'");
}

ImageF bilinear_resize(const ImageF& src, int out_width, int out_height) {
    if (out_width <= 0 || out_height <= 0) throw data_error("resize target must be positive");
    ImageF out = make_imagef(out_width, out_height);
    const double sx = static_cast<double>(src.width) / out_width;
    const double sy = static_cast<double>(src.height) / out_height;
    for (int oy = 0; oy < out_height; ++oy) {
        const double fy = std::clamp((oy + 0.5) * sy - 0.5, 0.0, static_cast<double>(src.height - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, src.height - 1);
        const double wy = fy - y0;
        for (int ox = 0; ox < out_width; ++ox) {
            const double fx = std::clamp((ox + 0.5) * sx - 0.5, 0.0, static_cast<double>(src.width - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, src.width - 1);
            const double wx = fx - x0;
            const double top = src.at(x0, y0) * (1.0 - wx) + src.at(x1, y0) * wx;
            const double bot = src.at(x0, y1) * (1.0 - wx) + src.at(x1, y1) * wx;
            out.at(ox, oy) = top * (1.0 - wy) + bot * wy;
        }
    }
    return out;
}

}  // namespace fer
