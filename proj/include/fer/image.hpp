#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace fer {

/// 8-bit grayscale image, row-major.
struct Image8 {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Double grayscale image with values in [0,1].
struct ImageF {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

Image8 make_image8(int width, int height, std::uint8_t fill = 0);
ImageF make_imagef(int width, int height, double fill = 0.0);

ImageF to_float(const Image8& img);          // /255
Image8 quantize(const ImageF& img);          // clamp to [0,1], round to 8 bits

/// Reads an 8-bit grayscale image; dispatches on file magic (PNG or PGM,
/// both P5 and P2). 16-bit and color PNGs are converted to 8-bit gray.
Image8 load_image(const std::filesystem::path& path);

void save_png(const std::filesystem::path& path, const Image8& img);
void save_pgm(const std::filesystem::path& path, const Image8& img);

/// Bilinear resample with pixel-center alignment.
ImageF bilinear_resize(const ImageF& src, int out_width, int out_height);

}  // namespace fer
