#include "core/event_algebra.hpp"

#include <cmath>
#include <cstdlib>

#include "core/errors.hpp"

namespace celf {

double log_gap(int64_t event_sum, const SensorConfig& cfg) {
    cfg.validate();
    return cfg.tau * static_cast<double>(event_sum);
}

namespace {

void check_transition_stack(const std::vector<EventImage>& images) {
    if (images.empty()) fail_invalid("no event images given");
    int w = images.front().width();
    int h = images.front().height();
    for (const EventImage& e : images) {
        if (e.width() != w || e.height() != h) fail_dims("event image dimensions differ");
    }
}

}  // namespace

EventImage virtual_event(const std::vector<EventImage>& images, int from, int to) {
    check_transition_stack(images);
    int n = static_cast<int>(images.size()) + 1;
    if (from < 1 || from > n || to < 1 || to > n) fail_invalid("virtual_event: index out of range");
    EventImage out(images.front().width(), images.front().height(), from, to);
    int lo = std::min(from, to);
    int hi = std::max(from, to);
    int sign = from < to ? 1 : -1;
    for (int k = lo; k < hi; ++k) {
        const std::vector<int32_t>& src = images[static_cast<size_t>(k) - 1].values();
        std::vector<int32_t>& dst = out.values();
        for (size_t i = 0; i < dst.size(); ++i) dst[i] += sign * src[i];
    }
    return out;
}

RecoveredIntensities recover_intensities(const std::vector<EventImage>& images, int black_index,
                                         const SensorConfig& cfg) {
    cfg.validate();
    check_transition_stack(images);
    int n = static_cast<int>(images.size()) + 1;
    if (black_index < 1 || black_index > n) fail_invalid("recover_intensities: black index out of range");
    int w = images.front().width();
    int h = images.front().height();
    size_t px = static_cast<size_t>(w) * h;

    RecoveredIntensities out;
    out.images.reserve(n);
    std::vector<std::vector<double>> planes(static_cast<size_t>(n), std::vector<double>(px, 0.0));

    // Cumulative sums S walk outward from the black frame in both directions.
    std::vector<int64_t> s(px, 0);
    auto emit = [&](int target) {
        std::vector<double>& plane = planes[static_cast<size_t>(target) - 1];
        for (size_t i = 0; i < px; ++i) {
            double v = cfg.epsilon * (std::exp(cfg.tau * static_cast<double>(s[i])) - 1.0);
            if (v < 0.0) {
                ++out.clamped_pixels;
                v = 0.0;
            } else if (v > 1.0) {
                ++out.clamped_pixels;
                v = 1.0;
            }
            plane[i] = v;
        }
    };
    for (int t = black_index + 1; t <= n; ++t) {
        const std::vector<int32_t>& e = images[static_cast<size_t>(t) - 2].values();
        for (size_t i = 0; i < px; ++i) s[i] += e[i];
        emit(t);
    }
    std::fill(s.begin(), s.end(), 0);
    for (int t = black_index - 1; t >= 1; --t) {
        const std::vector<int32_t>& e = images[static_cast<size_t>(t) - 1].values();
        for (size_t i = 0; i < px; ++i) s[i] -= e[i];
        emit(t);
    }
    for (int t = 1; t <= n; ++t) {
        out.images.push_back(
            CodedImage::from_buffer(w, h, std::move(planes[static_cast<size_t>(t) - 1]), true));
    }
    return out;
}

PermuteReport permute_check(const LightField& lf, const std::vector<AperturePattern>& patterns,
                            const std::vector<int>& perm, const SensorConfig& cfg,
                            EventModel mode) {
    int n = static_cast<int>(patterns.size());
    if (n < 2) fail_invalid("permute_check needs at least two patterns");
    if (static_cast<int>(perm.size()) != n) fail_invalid("permutation length must match pattern count");
    std::vector<bool> seen(static_cast<size_t>(n), false);
    for (int v : perm) {
        if (v < 1 || v > n || seen[static_cast<size_t>(v) - 1])
            fail_invalid("perm is not a bijection on 1..N");
        seen[static_cast<size_t>(v) - 1] = true;
    }
    if (!cfg.noiseless) fail_invalid("permute_check requires a noiseless sensor config");

    std::vector<AperturePattern> shuffled;
    shuffled.reserve(patterns.size());
    for (int v : perm) shuffled.push_back(patterns[static_cast<size_t>(v) - 1]);

    std::vector<EventImage> orig = simulate_sequence(lf, patterns, cfg, mode);
    std::vector<EventImage> direct = simulate_sequence(lf, shuffled, cfg, mode);

    PermuteReport report;
    int64_t within_one = 0;
    for (int k = 1; k < n; ++k) {
        EventImage predicted = virtual_event(orig, perm[static_cast<size_t>(k) - 1],
                                             perm[static_cast<size_t>(k)]);
        const std::vector<int32_t>& p = predicted.values();
        const std::vector<int32_t>& d = direct[static_cast<size_t>(k) - 1].values();
        for (size_t i = 0; i < p.size(); ++i) {
            int64_t diff = std::abs(static_cast<int64_t>(p[i]) - static_cast<int64_t>(d[i]));
            report.max_abs_discrepancy = std::max(report.max_abs_discrepancy, diff);
            if (diff <= 1) ++within_one;
            ++report.pixels_compared;
        }
    }
    if (report.pixels_compared)
        report.frac_within_one = static_cast<double>(within_one) / static_cast<double>(report.pixels_compared);
    return report;
}

}  // namespace celf
