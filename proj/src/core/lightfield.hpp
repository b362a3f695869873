#ifndef CELF_CORE_LIGHTFIELD_HPP
#define CELF_CORE_LIGHTFIELD_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "core/errors.hpp"

namespace celf {

// 4-D light field L(x,y,u,v) with an 8x8 view grid, monochrome values in
// [0,1]. Storage is (y, x, v, u) row-major; every module in the library
// adopts this layout.
class LightField {
public:
    static constexpr int kViews = 8;

    LightField(int width, int height);
    static LightField from_buffer(int width, int height, std::vector<double> values);

    int width() const { return width_; }
    int height() const { return height_; }

    size_t index(int x, int y, int u, int v) const {
        return ((static_cast<size_t>(y) * width_ + x) * kViews + v) * kViews + u;
    }
    double at(int x, int y, int u, int v) const { return values_[index(x, y, u, v)]; }
    void set(int x, int y, int u, int v, double value) { values_[index(x, y, u, v)] = value; }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    std::vector<double> view(int u, int v) const;  // W*H, (y,x) row-major

    // Throws InvalidArgument if any value is outside [0,1].
    void validate() const;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> values_;
};

// One 8x8 aperture transmittance code. Element (u,v) is stored at v*8+u.
class AperturePattern {
public:
    static constexpr int kSize = 8;

    AperturePattern() { values_.fill(0.0); }
    static AperturePattern black();
    static AperturePattern ones();
    static AperturePattern one_hot(int u, int v);
    static AperturePattern from_array(const std::array<double, 64>& values, bool binary = false);
    static AperturePattern random_binary(uint64_t seed_key);

    double at(int u, int v) const { return values_[v * kSize + u]; }
    void set(int u, int v, double value) { values_[v * kSize + u] = value; }
    const std::array<double, 64>& values() const { return values_; }

    bool binary() const { return binary_; }
    void set_binary(bool b) { binary_ = b; }

    double total_transmittance() const;

    void validate() const;

private:
    std::array<double, 64> values_{};
    bool binary_ = false;
};

// Single coded sensor image. `normalized` marks values divided by the view
// count (64), i.e. guaranteed to lie in [0,1] for a valid light field.
class CodedImage {
public:
    CodedImage(int width, int height, bool normalized = false);
    static CodedImage from_buffer(int width, int height, std::vector<double> values,
                                  bool normalized);

    int width() const { return width_; }
    int height() const { return height_; }
    bool normalized() const { return normalized_; }

    double at(int x, int y) const { return values_[static_cast<size_t>(y) * width_ + x]; }
    void set(int x, int y, double value) { values_[static_cast<size_t>(y) * width_ + x] = value; }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    void validate() const;

private:
    int width_ = 0;
    int height_ = 0;
    bool normalized_ = false;
    std::vector<double> values_;
};

// I(x,y) = sum_{u,v} a(u,v) * L(x,y,u,v)
CodedImage code_image(const LightField& lf, const AperturePattern& pattern);

// I / 64; rejects an already-normalized image.
CodedImage normalize(const CodedImage& img);

// All axis-aligned square patches of the given size at the given stride,
// scanned row-major over the (x0, y0) grid.
std::vector<LightField> extract_patches(const LightField& lf, int size, int stride);

// Deterministic synthetic scene: `layers` textured fronto-parallel planes at
// disparities 0, 2, 4, ... (layer j at 2*j, larger disparity in front).
// View (u,v) sees layer j translated by (d*(u-4), d*(v-4)), occlusion by
// depth order, edge-clamped sampling.
LightField synth_lightfield(uint64_t seed, int width, int height, int layers);

int synth_layer_disparity(int layer);

}  // namespace celf

#endif
