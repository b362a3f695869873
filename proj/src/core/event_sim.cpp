#include "core/event_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace celf {

void SensorConfig::validate() const {
    if (!(tau > 0.0)) fail_invalid("sensor threshold tau must be positive");
    if (!(epsilon > 0.0)) fail_invalid("sensor epsilon must be positive");
    if (!(sigma_w >= 0.0) || !(sigma_z >= 0.0)) fail_invalid("sensor noise stds must be non-negative");
}

EventImage::EventImage(int width, int height, int from, int to)
    : width_(width), height_(height), from_(from), to_(to) {
    if (width <= 0 || height <= 0) fail_invalid("event image dimensions must be positive");
    values_.assign(static_cast<size_t>(width) * height, 0);
}

int64_t EventImage::abs_sum() const {
    int64_t total = 0;
    for (int32_t v : values_) total += std::abs(static_cast<int64_t>(v));
    return total;
}

EventStream::EventStream(int width, int height) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) fail_invalid("event stream dimensions must be positive");
}

EventStream EventStream::from_records(int width, int height, std::vector<EventRecord> records) {
    EventStream s(width, height);
    for (const EventRecord& r : records) {
        if (r.x >= width || r.y >= height) fail_invalid("event record out of frame");
        if (r.polarity != 1 && r.polarity != -1) fail_invalid("event polarity must be +1 or -1");
    }
    std::stable_sort(records.begin(), records.end(), [](const EventRecord& a, const EventRecord& b) {
        if (a.t != b.t) return a.t < b.t;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });
    s.records_ = std::move(records);
    return s;
}

RefState::RefState(int width, int height, double initial_logref) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) fail_invalid("reference state dimensions must be positive");
    logref_.assign(static_cast<size_t>(width) * height, initial_logref);
}

RefState RefState::black(int width, int height, double epsilon) {
    if (!(epsilon > 0.0)) fail_invalid("epsilon must be positive");
    return RefState(width, height, std::log(epsilon));
}

int64_t quantize(double x) {
    if (!std::isfinite(x)) fail_invalid("quantize: non-finite input");
    return static_cast<int64_t>(std::trunc(x));
}

double ste_quantize(double x) { return static_cast<double>(quantize(x)); }

double ste_quantize_backward(double upstream) { return upstream; }

std::pair<double, double> sample_noise(const SensorConfig& cfg, int transition, int x, int y) {
    if (cfg.noiseless) return {0.0, 0.0};
    uint64_t pix = static_cast<uint64_t>(y) << 32 | static_cast<uint32_t>(x);
    auto [nw, nz] = rng::normal_pair(rng::key(cfg.seed, static_cast<uint64_t>(transition), pix, 0));
    double w = cfg.sigma_w * nw;
    double z = cfg.sigma_z * nz;
    for (uint64_t k = 1; cfg.tau + z <= 1e-6; ++k) {
        z = cfg.sigma_z *
            rng::normal_pair(rng::key(cfg.seed, static_cast<uint64_t>(transition), pix, k)).first;
    }
    return {w, z};
}

namespace {

void require_normalized_pair(const CodedImage& a, const CodedImage& b) {
    if (a.width() != b.width() || a.height() != b.height())
        fail_dims("event generation: image dimensions differ");
    if (!a.normalized() || !b.normalized())
        fail_invalid("event generation expects normalized intensities");
}

}  // namespace

EventImage gen_events_baseline(const CodedImage& prev, const CodedImage& curr,
                               const SensorConfig& cfg, int transition) {
    cfg.validate();
    require_normalized_pair(prev, curr);
    EventImage ev(curr.width(), curr.height(), transition, transition + 1);
    for (int y = 0; y < curr.height(); ++y) {
        for (int x = 0; x < curr.width(); ++x) {
            auto [w, z] = sample_noise(cfg, transition, x, y);
            double diff = std::log(curr.at(x, y) + cfg.epsilon) - std::log(prev.at(x, y) + cfg.epsilon);
            ev.set(x, y, static_cast<int32_t>(quantize((diff + w) / (cfg.tau + z))));
        }
    }
    return ev;
}

std::pair<EventImage, RefState> gen_events_ra(const CodedImage& curr, const RefState& ref,
                                              const SensorConfig& cfg, int transition) {
    cfg.validate();
    if (curr.width() != ref.width() || curr.height() != ref.height())
        fail_dims("event generation: reference dimensions differ from image");
    if (!curr.normalized()) fail_invalid("event generation expects normalized intensities");
    EventImage ev(curr.width(), curr.height(), transition, transition + 1);
    RefState next = ref;
    for (int y = 0; y < curr.height(); ++y) {
        for (int x = 0; x < curr.width(); ++x) {
            auto [w, z] = sample_noise(cfg, transition, x, y);
            double diff = std::log(curr.at(x, y) + cfg.epsilon) - ref.at(x, y);
            int64_t e = quantize((diff + w) / (cfg.tau + z));
            ev.set(x, y, static_cast<int32_t>(e));
            size_t i = static_cast<size_t>(y) * curr.width() + x;
            next.logref()[i] = ref.logref()[i] + cfg.tau * static_cast<double>(e);
        }
    }
    return {std::move(ev), std::move(next)};
}

std::vector<EventImage> simulate_sequence(const LightField& lf,
                                          const std::vector<AperturePattern>& patterns,
                                          const SensorConfig& cfg, EventModel mode) {
    cfg.validate();
    if (patterns.size() < 2) fail_invalid("simulate_sequence needs at least two patterns");
    std::vector<CodedImage> images;
    images.reserve(patterns.size());
    for (const AperturePattern& p : patterns) images.push_back(normalize(code_image(lf, p)));

    std::vector<EventImage> out;
    out.reserve(patterns.size() - 1);
    if (mode == EventModel::Baseline) {
        for (size_t i = 1; i < images.size(); ++i) {
            out.push_back(gen_events_baseline(images[i - 1], images[i], cfg, static_cast<int>(i)));
        }
    } else {
        RefState ref = RefState::black(lf.width(), lf.height(), cfg.epsilon);
        SensorConfig settle = cfg;
        settle.noiseless = true;
        ref = gen_events_ra(images[0], ref, settle, 0).second;
        for (size_t i = 1; i < images.size(); ++i) {
            auto [ev, next] = gen_events_ra(images[i], ref, cfg, static_cast<int>(i));
            out.push_back(std::move(ev));
            ref = std::move(next);
        }
    }
    return out;
}

EventImage accumulate_stream(const EventStream& stream, uint32_t t0, uint32_t t1) {
    if (t0 > t1) fail_invalid("accumulate_stream: t0 must not exceed t1");
    EventImage ev(stream.width(), stream.height());
    for (const EventRecord& r : stream.records()) {
        if (r.t < t0) continue;
        if (r.t >= t1) break;
        ev.set(r.x, r.y, ev.at(r.x, r.y) + r.polarity);
    }
    return ev;
}

EventStream expand_to_stream(const std::vector<EventImage>& images,
                             const std::vector<uint32_t>& durations_us) {
    if (images.empty()) fail_invalid("expand_to_stream: no event images");
    if (images.size() != durations_us.size())
        fail_dims("expand_to_stream: one duration per event image required");
    int w = images.front().width();
    int h = images.front().height();
    uint64_t total = 0;
    for (size_t i = 0; i < images.size(); ++i) {
        if (images[i].width() != w || images[i].height() != h)
            fail_dims("expand_to_stream: event image dimensions differ");
        if (durations_us[i] == 0) fail_invalid("expand_to_stream: zero window duration");
        total += durations_us[i];
    }
    if (total > UINT32_MAX) fail_invalid("expand_to_stream: timeline exceeds 32-bit microseconds");

    std::vector<EventRecord> records;
    uint64_t t_base = 0;
    for (size_t i = 0; i < images.size(); ++i) {
        const EventImage& ev = images[i];
        double dur = static_cast<double>(durations_us[i]);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                int32_t c = ev.at(x, y);
                if (c == 0) continue;
                int8_t pol = c > 0 ? int8_t{1} : int8_t{-1};
                uint32_t k = static_cast<uint32_t>(c > 0 ? c : -c);
                double phase = rng::uniform01(
                    rng::key(0, static_cast<uint64_t>(y), static_cast<uint64_t>(x)));
                for (uint32_t j = 0; j < k; ++j) {
                    uint64_t off = static_cast<uint64_t>(dur * (j + phase) / k);
                    records.push_back({static_cast<uint16_t>(x), static_cast<uint16_t>(y),
                                       static_cast<uint32_t>(t_base + off), pol});
                }
            }
        }
        t_base += durations_us[i];
    }
    return EventStream::from_records(w, h, std::move(records));
}

}  // namespace celf
