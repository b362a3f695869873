#include "core/metrics.hpp"

#include <cmath>
#include <limits>

#include "core/errors.hpp"

namespace celf {

double psnr(const LightField& ref, const LightField& est) {
    if (ref.width() != est.width() || ref.height() != est.height())
        fail_dims("psnr: shape mismatch");
    ref.validate();
    est.validate();
    const std::vector<double>& a = ref.values();
    const std::vector<double>& b = est.values();
    double mse = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

namespace {

constexpr int kWin = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

std::vector<double> gaussian_kernel() {
    std::vector<double> k(kWin);
    double sum = 0.0;
    for (int i = 0; i < kWin; ++i) {
        double d = i - (kWin - 1) / 2.0;
        k[static_cast<size_t>(i)] = std::exp(-d * d / (2.0 * kSigma * kSigma));
        sum += k[static_cast<size_t>(i)];
    }
    for (double& v : k) v /= sum;
    return k;
}

// Separable valid-region Gaussian filter: output is (w-10) x (h-10).
std::vector<double> blur_valid(const std::vector<double>& img, int w, int h,
                               const std::vector<double>& k) {
    int wo = w - kWin + 1;
    std::vector<double> rows(static_cast<size_t>(wo) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < wo; ++x) {
            double acc = 0.0;
            for (int i = 0; i < kWin; ++i) acc += k[static_cast<size_t>(i)] * img[static_cast<size_t>(y) * w + x + i];
            rows[static_cast<size_t>(y) * wo + x] = acc;
        }
    }
    int ho = h - kWin + 1;
    std::vector<double> out(static_cast<size_t>(wo) * ho);
    for (int y = 0; y < ho; ++y) {
        for (int x = 0; x < wo; ++x) {
            double acc = 0.0;
            for (int i = 0; i < kWin; ++i) acc += k[static_cast<size_t>(i)] * rows[static_cast<size_t>(y + i) * wo + x];
            out[static_cast<size_t>(y) * wo + x] = acc;
        }
    }
    return out;
}

}  // namespace

double ssim(const std::vector<double>& ref, const std::vector<double>& est, int width, int height) {
    if (width < kWin || height < kWin) fail_invalid("ssim: image smaller than the 11x11 window");
    size_t n = static_cast<size_t>(width) * height;
    if (ref.size() != n || est.size() != n) fail_dims("ssim: buffer size does not match dimensions");

    std::vector<double> k = gaussian_kernel();
    std::vector<double> xx(n), yy(n), xy(n);
    for (size_t i = 0; i < n; ++i) {
        xx[i] = ref[i] * ref[i];
        yy[i] = est[i] * est[i];
        xy[i] = ref[i] * est[i];
    }
    std::vector<double> mx = blur_valid(ref, width, height, k);
    std::vector<double> my = blur_valid(est, width, height, k);
    std::vector<double> mxx = blur_valid(xx, width, height, k);
    std::vector<double> myy = blur_valid(yy, width, height, k);
    std::vector<double> mxy = blur_valid(xy, width, height, k);

    double total = 0.0;
    for (size_t i = 0; i < mx.size(); ++i) {
        double vx = mxx[i] - mx[i] * mx[i];
        double vy = myy[i] - my[i] * my[i];
        double cxy = mxy[i] - mx[i] * my[i];
        double num = (2.0 * mx[i] * my[i] + kC1) * (2.0 * cxy + kC2);
        double den = (mx[i] * mx[i] + my[i] * my[i] + kC1) * (vx + vy + kC2);
        total += num / den;
    }
    return total / static_cast<double>(mx.size());
}

double lf_ssim(const LightField& ref, const LightField& est) {
    if (ref.width() != est.width() || ref.height() != est.height())
        fail_dims("lf_ssim: shape mismatch");
    double total = 0.0;
    for (int v = 0; v < LightField::kViews; ++v) {
        for (int u = 0; u < LightField::kViews; ++u) {
            total += ssim(ref.view(u, v), est.view(u, v), ref.width(), ref.height());
        }
    }
    return total / 64.0;
}

EventStats event_stats(const std::vector<EventImage>& images) {
    if (images.empty()) fail_invalid("event_stats: empty list");
    int w = images.front().width();
    int h = images.front().height();
    EventStats stats;
    stats.per_transition.reserve(images.size());
    for (const EventImage& e : images) {
        if (e.width() != w || e.height() != h) fail_dims("event_stats: dimensions differ");
        double mean = static_cast<double>(e.abs_sum()) / (static_cast<double>(w) * h);
        stats.per_transition.push_back(mean);
        stats.total += mean;
    }
    return stats;
}

DataRate data_rate(double events_per_pixel, int bits_per_event) {
    if (!(events_per_pixel > 0.0)) fail_invalid("data_rate: events/pixel must be positive");
    if (bits_per_event <= 0) fail_invalid("data_rate: bits/event must be positive");
    DataRate r;
    r.sensor_bits_per_pixel = events_per_pixel * static_cast<double>(bits_per_event);
    r.lf_bits_per_pixel = r.sensor_bits_per_pixel / 64.0;
    r.events_per_lf_pixel = events_per_pixel / 64.0;
    return r;
}

}  // namespace celf
