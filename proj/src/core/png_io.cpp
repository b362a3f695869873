#include "core/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "core/errors.hpp"

namespace celf {

namespace {

struct FileCloser {
    FILE* f = nullptr;
    ~FileCloser() {
        if (f) std::fclose(f);
    }
};

}  // namespace

void write_png_gray(const std::string& path, const std::vector<double>& values, int width,
                    int height, int bit_depth) {
    if (width <= 0 || height <= 0) fail_invalid("png: dimensions must be positive");
    if (bit_depth != 8 && bit_depth != 16) fail_invalid("png: bit depth must be 8 or 16");
    if (values.size() != static_cast<size_t>(width) * height)
        fail_dims("png: buffer size does not match dimensions");

    std::string tmp = path + ".tmp";
    FileCloser fc{std::fopen(tmp.c_str(), "wb")};
    if (!fc.f) throw IoError("cannot open for writing: " + tmp);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::filesystem::remove(tmp);
        throw IoError("png write failed: " + path);
    }
    png_init_io(png, fc.f);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
                 bit_depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    double peak = bit_depth == 8 ? 255.0 : 65535.0;
    size_t stride = static_cast<size_t>(width) * (bit_depth == 8 ? 1 : 2);
    std::vector<png_byte> row(stride);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double v = values[static_cast<size_t>(y) * width + x];
            if (v < 0.0) v = 0.0;
            if (v > 1.0) v = 1.0;
            unsigned q = static_cast<unsigned>(std::lround(v * peak));
            if (bit_depth == 8) {
                row[static_cast<size_t>(x)] = static_cast<png_byte>(q);
            } else {
                row[static_cast<size_t>(x) * 2] = static_cast<png_byte>(q >> 8);
                row[static_cast<size_t>(x) * 2 + 1] = static_cast<png_byte>(q & 0xff);
            }
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fc.f);
    fc.f = nullptr;

    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw IoError("cannot move into place: " + path);
    }
}

GrayImage read_png_gray(const std::string& path) {
    FileCloser fc{std::fopen(path.c_str(), "rb")};
    if (!fc.f) throw IoError("cannot open: " + path);

    png_byte header[8];
    if (std::fread(header, 1, 8, fc.f) != 8 || png_sig_cmp(header, 0, 8))
        throw FormatError("not a PNG file: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("png read failed: " + path);
    }
    png_init_io(png, fc.f);
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    png_uint_32 w = png_get_image_width(png, info);
    png_uint_32 h = png_get_image_height(png, info);
    int depth = png_get_bit_depth(png, info);
    int color = png_get_color_type(png, info);
    if (color != PNG_COLOR_TYPE_GRAY) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("expected a grayscale PNG: " + path);
    }
    if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    png_read_update_info(png, info);
    depth = png_get_bit_depth(png, info);

    GrayImage img;
    img.width = static_cast<int>(w);
    img.height = static_cast<int>(h);
    img.bit_depth = depth;
    img.values.resize(static_cast<size_t>(w) * h);

    double peak = depth == 8 ? 255.0 : 65535.0;
    size_t stride = png_get_rowbytes(png, info);
    std::vector<png_byte> row(stride);
    for (png_uint_32 y = 0; y < h; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (png_uint_32 x = 0; x < w; ++x) {
            unsigned q = depth == 8 ? row[x]
                                    : (static_cast<unsigned>(row[x * 2]) << 8) | row[x * 2 + 1];
            img.values[static_cast<size_t>(y) * w + x] = q / peak;
        }
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

}  // namespace celf
