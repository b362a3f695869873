#ifndef CELF_CORE_PNG_IO_HPP
#define CELF_CORE_PNG_IO_HPP

#include <string>
#include <vector>

namespace celf {

struct GrayImage {
    int width = 0;
    int height = 0;
    int bit_depth = 0;                // 8 or 16
    std::vector<double> values;       // row-major, scaled into [0,1]
};

// Grayscale PNG, values clamped to [0,1] and quantized to the bit depth.
// Writes to a temporary file and renames into place.
void write_png_gray(const std::string& path, const std::vector<double>& values, int width,
                    int height, int bit_depth = 16);

GrayImage read_png_gray(const std::string& path);

}  // namespace celf

#endif
