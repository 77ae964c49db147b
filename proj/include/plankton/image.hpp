#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace plankton {

// 8-bit RGB raster, row-major, 3 interleaved channels.
struct RoiImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // size = width * height * 3

    static RoiImage filled(int width, int height, std::uint8_t value = 0);

    std::uint8_t* at(int x, int y) { return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x); }
    const std::uint8_t* at(int x, int y) const {
        return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
    }
};

// Decode by magic bytes; PNG and JPEG only.
RoiImage decode_image(const std::string& path);
void write_png(const RoiImage& image, const std::string& path);
void write_jpeg(const RoiImage& image, const std::string& path, int quality = 95);

}  // namespace plankton
