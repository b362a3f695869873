#include "core/lightfield.hpp"

#include <algorithm>
#include <cmath>

#include "core/rng.hpp"

namespace celf {

LightField::LightField(int width, int height) : width_(width), height_(height) {
    if (width < 1 || height < 1) fail_invalid("light field dimensions must be >= 1");
    values_.assign(static_cast<size_t>(width) * height * kViews * kViews, 0.0);
}

LightField LightField::from_buffer(int width, int height, std::vector<double> values) {
    LightField lf(width, height);
    if (values.size() != lf.values_.size())
        fail_dims("light field buffer size does not match dimensions");
    lf.values_ = std::move(values);
    lf.validate();
    return lf;
}

std::vector<double> LightField::view(int u, int v) const {
    if (u < 0 || u >= kViews || v < 0 || v >= kViews) fail_invalid("view index out of range");
    std::vector<double> out(static_cast<size_t>(width_) * height_);
    for (int y = 0; y < height_; ++y)
        for (int x = 0; x < width_; ++x)
            out[static_cast<size_t>(y) * width_ + x] = at(x, y, u, v);
    return out;
}

void LightField::validate() const {
    for (double v : values_)
        if (!(v >= 0.0 && v <= 1.0)) fail_invalid("light field value outside [0,1]");
}

AperturePattern AperturePattern::black() {
    AperturePattern p;
    p.binary_ = true;
    return p;
}

AperturePattern AperturePattern::ones() {
    AperturePattern p;
    p.values_.fill(1.0);
    p.binary_ = true;
    return p;
}

AperturePattern AperturePattern::one_hot(int u, int v) {
    if (u < 0 || u >= kSize || v < 0 || v >= kSize) fail_invalid("one_hot view index out of range");
    AperturePattern p;
    p.set(u, v, 1.0);
    p.binary_ = true;
    return p;
}

AperturePattern AperturePattern::from_array(const std::array<double, 64>& values, bool binary) {
    AperturePattern p;
    p.values_ = values;
    p.binary_ = binary;
    p.validate();
    return p;
}

AperturePattern AperturePattern::random_binary(uint64_t seed_key) {
    AperturePattern p;
    for (int i = 0; i < 64; ++i)
        p.values_[i] = (rng::mix(seed_key + i) >> 63) ? 1.0 : 0.0;
    p.binary_ = true;
    return p;
}

double AperturePattern::total_transmittance() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s;
}

void AperturePattern::validate() const {
    for (double v : values_) {
        if (!(v >= 0.0 && v <= 1.0)) fail_invalid("aperture pattern element outside [0,1]");
        if (binary_ && v != 0.0 && v != 1.0)
            fail_invalid("pattern flagged binary has a fractional element");
    }
}

CodedImage::CodedImage(int width, int height, bool normalized)
    : width_(width), height_(height), normalized_(normalized) {
    if (width < 1 || height < 1) fail_invalid("coded image dimensions must be >= 1");
    values_.assign(static_cast<size_t>(width) * height, 0.0);
}

CodedImage CodedImage::from_buffer(int width, int height, std::vector<double> values,
                                   bool normalized) {
    CodedImage img(width, height, normalized);
    if (values.size() != img.values_.size())
        fail_dims("coded image buffer size does not match dimensions");
    img.values_ = std::move(values);
    img.validate();
    return img;
}

void CodedImage::validate() const {
    for (double v : values_) {
        if (!(v >= 0.0)) fail_invalid("coded image value is negative");
        if (normalized_ && v > 1.0) fail_invalid("normalized coded image value exceeds 1");
    }
}

CodedImage code_image(const LightField& lf, const AperturePattern& pattern) {
    pattern.validate();
    CodedImage img(lf.width(), lf.height(), false);
    const double* l = lf.values().data();
    const std::array<double, 64>& a = pattern.values();
    double* out = img.values().data();
    const size_t pixels = static_cast<size_t>(lf.width()) * lf.height();
    for (size_t p = 0; p < pixels; ++p) {
        const double* rays = l + p * 64;
        double s = 0.0;
        for (int i = 0; i < 64; ++i) s += a[i] * rays[i];
        out[p] = s;
    }
    return img;
}

CodedImage normalize(const CodedImage& img) {
    if (img.normalized()) throw StateError("coded image is already normalized");
    CodedImage out(img.width(), img.height(), true);
    const size_t n = img.values().size();
    for (size_t i = 0; i < n; ++i) out.values()[i] = img.values()[i] / 64.0;
    return out;
}

std::vector<LightField> extract_patches(const LightField& lf, int size, int stride) {
    if (size <= 0 || stride <= 0) fail_invalid("patch size and stride must be positive");
    if (size > lf.width() || size > lf.height()) fail_invalid("patch size exceeds image");
    std::vector<LightField> patches;
    for (int y0 = 0; y0 + size <= lf.height(); y0 += stride) {
        for (int x0 = 0; x0 + size <= lf.width(); x0 += stride) {
            LightField p(size, size);
            for (int y = 0; y < size; ++y)
                for (int x = 0; x < size; ++x) {
                    const size_t src = lf.index(x0 + x, y0 + y, 0, 0);
                    const size_t dst = p.index(x, y, 0, 0);
                    std::copy_n(lf.values().data() + src, 64, p.values().data() + dst);
                }
            patches.push_back(std::move(p));
        }
    }
    return patches;
}

namespace {

double lattice_value(uint64_t seed, int tag, int octave, int gx, int gy) {
    return rng::uniform01(rng::key(seed, static_cast<uint64_t>(tag), octave,
                                   static_cast<uint64_t>(static_cast<int64_t>(gx)),
                                   static_cast<uint64_t>(static_cast<int64_t>(gy))));
}

double fade(double t) { return t * t * (3.0 - 2.0 * t); }

// Band-limited value noise: 3 octaves of smooth-interpolated lattice noise.
double value_noise(uint64_t seed, int tag, double x, double y) {
    double total = 0.0, amp_sum = 0.0, amp = 1.0;
    double cell = 16.0;
    for (int o = 0; o < 3; ++o) {
        const double fx = x / cell, fy = y / cell;
        const int gx = static_cast<int>(std::floor(fx));
        const int gy = static_cast<int>(std::floor(fy));
        const double tx = fade(fx - gx), ty = fade(fy - gy);
        const double v00 = lattice_value(seed, tag, o, gx, gy);
        const double v10 = lattice_value(seed, tag, o, gx + 1, gy);
        const double v01 = lattice_value(seed, tag, o, gx, gy + 1);
        const double v11 = lattice_value(seed, tag, o, gx + 1, gy + 1);
        const double v = (v00 * (1 - tx) + v10 * tx) * (1 - ty) + (v01 * (1 - tx) + v11 * tx) * ty;
        total += amp * v;
        amp_sum += amp;
        amp *= 0.5;
        cell *= 0.5;
    }
    return total / amp_sum;
}

}  // namespace

int synth_layer_disparity(int layer) { return 2 * layer; }

LightField synth_lightfield(uint64_t seed, int width, int height, int layers) {
    if (width < 1 || height < 1) fail_invalid("synthetic light field dimensions must be >= 1");
    if (layers < 1) fail_invalid("synthetic light field needs at least one layer");

    LightField lf(width, height);
    const int half = AperturePattern::kSize / 2;  // view shift pivot (u-4, v-4)

    // Per-layer textures and coverage masks on the reference canvas. Layer 0
    // is a full background; higher layers cover roughly 40% of the frame.
    std::vector<std::vector<double>> tex(layers);
    std::vector<std::vector<uint8_t>> mask(layers);
    for (int j = 0; j < layers; ++j) {
        tex[j].resize(static_cast<size_t>(width) * height);
        mask[j].assign(static_cast<size_t>(width) * height, 1);
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                const size_t i = static_cast<size_t>(y) * width + x;
                tex[j][i] = value_noise(seed, j * 2, x, y);
                if (j > 0) mask[j][i] = value_noise(seed, j * 2 + 1, x * 0.5, y * 0.5) > 0.55;
            }
    }

    auto clampi = [](int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); };

    for (int v = 0; v < LightField::kViews; ++v) {
        for (int u = 0; u < LightField::kViews; ++u) {
            for (int y = 0; y < height; ++y) {
                for (int x = 0; x < width; ++x) {
                    double val = 0.0;
                    for (int j = layers - 1; j >= 0; --j) {
                        const int d = synth_layer_disparity(j);
                        const int sx = clampi(x - d * (u - half), 0, width - 1);
                        const int sy = clampi(y - d * (v - half), 0, height - 1);
                        const size_t si = static_cast<size_t>(sy) * width + sx;
                        if (mask[j][si]) {
                            val = tex[j][si];
                            break;
                        }
                    }
                    lf.set(x, y, u, v, val);
                }
            }
        }
    }
    return lf;
}

}  // namespace celf
