#include "core/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace celf {

namespace {
constexpr uint64_t kTagLogits = 1;
constexpr uint64_t kTagNet = 2;
constexpr uint64_t kTagShuffle = 3;
constexpr uint64_t kTagTrainNoise = 4;
constexpr uint64_t kTagEvalNoise = 5;
}  // namespace

TrainMode parse_train_mode(const std::string& name) {
    if (name == "baseline") return TrainMode::Baseline;
    if (name == "baseline+BF" || name == "baseline+bf") return TrainMode::BaselineBF;
    if (name == "baseline+RA" || name == "baseline+ra") return TrainMode::BaselineRA;
    if (name == "baseline+BF+RA" || name == "baseline+bf+ra") return TrainMode::BaselineBFRA;
    fail_invalid("unknown training mode: " + name);
}

std::string to_string(TrainMode mode) {
    switch (mode) {
        case TrainMode::Baseline: return "baseline";
        case TrainMode::BaselineBF: return "baseline+BF";
        case TrainMode::BaselineRA: return "baseline+RA";
        case TrainMode::BaselineBFRA: return "baseline+BF+RA";
    }
    fail_invalid("unknown training mode value");
}

bool mode_black_first(TrainMode mode) {
    return mode == TrainMode::BaselineBF || mode == TrainMode::BaselineBFRA;
}

EventModel mode_event_model(TrainMode mode) {
    return (mode == TrainMode::BaselineRA || mode == TrainMode::BaselineBFRA)
               ? EventModel::ReferenceAware
               : EventModel::Baseline;
}

PatternLogits PatternLogits::random(int n, uint64_t seed, bool black_first) {
    if (n < 2) fail_invalid("need at least two patterns");
    PatternLogits out;
    out.count = n;
    out.values.assign(static_cast<size_t>(n) * 64, 0.0);
    out.frozen.assign(static_cast<size_t>(n), 0);
    if (black_first) out.frozen[0] = 1;
    for (int g = 0; g < n; ++g) {
        if (out.frozen[static_cast<size_t>(g)]) continue;
        for (int j = 0; j < 64; ++j) {
            double u = rng::uniform01(
                rng::key(seed, kTagLogits, static_cast<uint64_t>(g), static_cast<uint64_t>(j)));
            out.values[static_cast<size_t>(g) * 64 + j] = u - 0.5;
        }
    }
    return out;
}

std::vector<AperturePattern> patterns_from_logits(const PatternLogits& logits, double s) {
    if (!(s > 0.0)) fail_invalid("sharpness s must be positive");
    std::vector<AperturePattern> out;
    out.reserve(static_cast<size_t>(logits.count));
    for (int g = 0; g < logits.count; ++g) {
        if (logits.frozen_black(g)) {
            out.push_back(AperturePattern::black());
            continue;
        }
        const double* grid = logits.grid(g);
        std::array<double, 64> a;
        for (int j = 0; j < 64; ++j)
            a[static_cast<size_t>(j)] = 1.0 / (1.0 + std::exp(-s * grid[j]));
        out.push_back(AperturePattern::from_array(a));
    }
    return out;
}

std::vector<AperturePattern> binarize_patterns(const std::vector<AperturePattern>& patterns) {
    std::vector<AperturePattern> out;
    out.reserve(patterns.size());
    for (const AperturePattern& p : patterns) {
        p.validate();
        std::array<double, 64> b;
        for (int j = 0; j < 64; ++j)
            b[static_cast<size_t>(j)] = p.values()[static_cast<size_t>(j)] >= 0.5 ? 1.0 : 0.0;
        out.push_back(AperturePattern::from_array(b, true));
    }
    return out;
}

void TrainConfig::validate() const {
    if (n_patterns < 2) fail_invalid("train config: need at least two patterns");
    if (epochs < 1) fail_invalid("train config: epochs must be positive");
    if (batch_size < 1) fail_invalid("train config: batch size must be positive");
    if (!(s_init > 0.0)) fail_invalid("train config: s_init must be positive");
    if (!(s_growth >= 1.0)) fail_invalid("train config: s_growth must be at least 1");
    if (net_widths.empty() || net_widths.back() != 64)
        fail_invalid("train config: network must end in 64 output channels");
    sensor.validate();
    adam.validate();
}

namespace {

// Everything the backward pass needs from one acquisition.
struct AcquireTrace {
    int w = 0;
    int h = 0;
    int n = 0;
    std::vector<std::vector<double>> lbar;  // n normalized intensity planes
    std::vector<std::vector<double>> logi;  // n planes ln(lbar + eps)
    std::vector<std::vector<double>> tauz;  // n-1 planes tau + z
    Tensor events;                          // (n-1, h, w)
    int64_t abs_events = 0;
};

AcquireTrace acquire_trace(const LightField& lf, const std::vector<AperturePattern>& patterns,
                           const SensorConfig& sensor, EventModel model, bool quantized = true) {
    sensor.validate();
    if (patterns.size() < 2) fail_invalid("acquisition needs at least two patterns");
    AcquireTrace tr;
    tr.w = lf.width();
    tr.h = lf.height();
    tr.n = static_cast<int>(patterns.size());
    size_t px = static_cast<size_t>(tr.w) * tr.h;

    tr.lbar.reserve(static_cast<size_t>(tr.n));
    tr.logi.reserve(static_cast<size_t>(tr.n));
    for (int k = 0; k < tr.n; ++k) {
        CodedImage img = normalize(code_image(lf, patterns[static_cast<size_t>(k)]));
        std::vector<double> logs(px);
        for (size_t i = 0; i < px; ++i) logs[i] = std::log(img.values()[i] + sensor.epsilon);
        tr.lbar.push_back(img.values());
        tr.logi.push_back(std::move(logs));
    }

    tr.events = Tensor({tr.n - 1, tr.h, tr.w});
    tr.tauz.assign(static_cast<size_t>(tr.n) - 1, std::vector<double>(px));
    std::vector<double> ref;
    if (model == EventModel::ReferenceAware) ref = tr.logi[0];
    for (int t = 1; t < tr.n; ++t) {
        double* ev = tr.events.data() + static_cast<size_t>(t - 1) * px;
        std::vector<double>& tz = tr.tauz[static_cast<size_t>(t) - 1];
        const double* lcur = tr.logi[static_cast<size_t>(t)].data();
        const double* lprev = tr.logi[static_cast<size_t>(t) - 1].data();
        for (int y = 0; y < tr.h; ++y) {
            for (int x = 0; x < tr.w; ++x) {
                size_t i = static_cast<size_t>(y) * tr.w + x;
                auto [w, z] = sample_noise(sensor, t, x, y);
                tz[i] = sensor.tau + z;
                double diff = lcur[i] - (model == EventModel::ReferenceAware ? ref[i] : lprev[i]);
                double raw = (diff + w) / tz[i];
                double e = quantized ? static_cast<double>(quantize(raw)) : raw;
                ev[i] = e;
                tr.abs_events += static_cast<int64_t>(std::abs(e));
                if (model == EventModel::ReferenceAware) ref[i] += sensor.tau * e;
            }
        }
    }
    return tr;
}

// Chain rule from the event tensor back to the pattern entries: through the
// straight-through quantizer, the log, and the coded-image sum. grad_events
// is dLoss/dE; d_pattern (n x 64) accumulates dLoss/da.
void acquire_backward(const AcquireTrace& tr, const LightField& lf, const SensorConfig& sensor,
                      EventModel model, const Tensor& grad_events, double* d_pattern) {
    size_t px = static_cast<size_t>(tr.w) * tr.h;
    std::vector<std::vector<double>> dlog(static_cast<size_t>(tr.n), std::vector<double>(px, 0.0));

    if (model == EventModel::Baseline) {
        for (int k = 0; k < tr.n; ++k) {
            double* dl = dlog[static_cast<size_t>(k)].data();
            if (k >= 1) {
                const double* g = grad_events.data() + static_cast<size_t>(k - 1) * px;
                const double* tz = tr.tauz[static_cast<size_t>(k) - 1].data();
                for (size_t i = 0; i < px; ++i) dl[i] += g[i] / tz[i];
            }
            if (k <= tr.n - 2) {
                const double* g = grad_events.data() + static_cast<size_t>(k) * px;
                const double* tz = tr.tauz[static_cast<size_t>(k)].data();
                for (size_t i = 0; i < px; ++i) dl[i] -= g[i] / tz[i];
            }
        }
    } else {
        // Reverse recurrence through the reference updates. lambda carries
        // dLoss/d(reference after transition t).
        std::vector<double> lambda(px, 0.0);
        for (int t = tr.n - 1; t >= 1; --t) {
            const double* g = grad_events.data() + static_cast<size_t>(t - 1) * px;
            const double* tz = tr.tauz[static_cast<size_t>(t) - 1].data();
            double* dl = dlog[static_cast<size_t>(t)].data();
            for (size_t i = 0; i < px; ++i) {
                double h = g[i] + sensor.tau * lambda[i];
                dl[i] += h / tz[i];
                lambda[i] -= h / tz[i];
            }
        }
        double* dl0 = dlog[0].data();
        for (size_t i = 0; i < px; ++i) dl0[i] += lambda[i];
    }

    const std::vector<double>& lv = lf.values();
    for (int k = 0; k < tr.n; ++k) {
        const double* dl = dlog[static_cast<size_t>(k)].data();
        const std::vector<double>& lbar = tr.lbar[static_cast<size_t>(k)];
        double* dst = d_pattern + static_cast<size_t>(k) * 64;
        for (size_t i = 0; i < px; ++i) {
            double dcoded = dl[i] / (lbar[i] + sensor.epsilon) / 64.0;
            const double* rays = lv.data() + i * 64;
            for (int j = 0; j < 64; ++j) dst[j] += dcoded * rays[j];
        }
    }
}

SensorConfig with_seed(const SensorConfig& base, uint64_t seed) {
    SensorConfig out = base;
    out.seed = seed;
    return out;
}

}  // namespace

Tensor acquire_events(const LightField& lf, const std::vector<AperturePattern>& patterns,
                      const SensorConfig& sensor, EventModel model) {
    return acquire_trace(lf, patterns, sensor, model).events;
}

Tensor acquire_events_unquantized(const LightField& lf,
                                  const std::vector<AperturePattern>& patterns,
                                  const SensorConfig& sensor, EventModel model) {
    return acquire_trace(lf, patterns, sensor, model, false).events;
}

void acquire_pattern_grad(const LightField& lf, const std::vector<AperturePattern>& patterns,
                          const SensorConfig& sensor, EventModel model, const Tensor& grad_events,
                          double* d_pattern) {
    AcquireTrace tr = acquire_trace(lf, patterns, sensor, model);
    if (!grad_events.same_shape(tr.events)) fail_dims("acquire_pattern_grad: gradient shape");
    acquire_backward(tr, lf, sensor, model, grad_events, d_pattern);
}

std::vector<EventImage> acquire_event_images(const LightField& lf,
                                             const std::vector<AperturePattern>& patterns,
                                             const SensorConfig& sensor, EventModel model) {
    Tensor events = acquire_events(lf, patterns, sensor, model);
    int w = lf.width();
    int h = lf.height();
    size_t px = static_cast<size_t>(w) * h;
    std::vector<EventImage> out;
    out.reserve(static_cast<size_t>(events.dim(0)));
    for (int t = 0; t < events.dim(0); ++t) {
        EventImage img(w, h, t + 1, t + 2);
        const double* src = events.data() + static_cast<size_t>(t) * px;
        for (size_t i = 0; i < px; ++i) img.values()[i] = static_cast<int32_t>(src[i]);
        out.push_back(std::move(img));
    }
    return out;
}

Tensor lf_to_tensor(const LightField& lf) {
    int w = lf.width();
    int h = lf.height();
    Tensor t({64, h, w});
    double* out = t.data();
    const double* in = lf.values().data();
    size_t px = static_cast<size_t>(w) * h;
    for (size_t i = 0; i < px; ++i) {
        for (int c = 0; c < 64; ++c) out[static_cast<size_t>(c) * px + i] = in[i * 64 + c];
    }
    return t;
}

LightField tensor_to_lf(const Tensor& t) {
    if (t.shape().size() != 3 || t.dim(0) != 64) fail_dims("expected a (64,H,W) tensor");
    int h = t.dim(1);
    int w = t.dim(2);
    LightField lf(w, h);
    double* out = lf.values().data();
    const double* in = t.data();
    size_t px = static_cast<size_t>(w) * h;
    for (size_t i = 0; i < px; ++i) {
        for (int c = 0; c < 64; ++c) {
            double v = in[static_cast<size_t>(c) * px + i];
            out[i * 64 + c] = std::clamp(v, 0.0, 1.0);
        }
    }
    return lf;
}

LightField reconstruct(const LightField& lf, const std::vector<AperturePattern>& patterns,
                       const ReconNet& net, const SensorConfig& sensor, EventModel model) {
    Tensor events = acquire_events(lf, patterns, sensor, model);
    return tensor_to_lf(net.forward(events));
}

double eval_mse(const std::vector<LightField>& samples,
                const std::vector<AperturePattern>& patterns, const ReconNet& net,
                const SensorConfig& sensor, EventModel model) {
    if (samples.empty()) fail_invalid("eval_mse: no samples");
    double total = 0.0;
    for (size_t i = 0; i < samples.size(); ++i) {
        SensorConfig si = with_seed(sensor, rng::key(sensor.seed, kTagEvalNoise, i));
        Tensor events = acquire_events(samples[i], patterns, si, model);
        Tensor pred = net.forward(events);
        Tensor target = lf_to_tensor(samples[i]);
        total += mse_loss(pred, target).first;
    }
    return total / static_cast<double>(samples.size());
}

TrainResult train(const std::vector<LightField>& dataset, const TrainConfig& cfg) {
    cfg.validate();
    if (dataset.empty()) fail_invalid("train: empty dataset");
    int w = dataset.front().width();
    int h = dataset.front().height();
    for (const LightField& lf : dataset) {
        if (lf.width() != w || lf.height() != h) fail_dims("train: samples differ in patch size");
    }
    size_t n_val = dataset.size() / 10;
    size_t n_train = dataset.size() - n_val;

    bool bf = mode_black_first(cfg.mode);
    EventModel model = mode_event_model(cfg.mode);
    PatternLogits logits = PatternLogits::random(cfg.n_patterns, cfg.seed, bf);
    ReconNet net(cfg.n_patterns - 1, cfg.net_widths, rng::key(cfg.seed, kTagNet));

    std::vector<int> free_grids;
    for (int g = 0; g < logits.count; ++g) {
        if (!logits.frozen_black(g)) free_grids.push_back(g);
    }
    size_t n_logit_params = free_grids.size() * 64;
    size_t n_net_params = net.param_count();
    std::vector<double> params(n_logit_params + n_net_params);
    std::vector<double> grads(params.size());
    std::vector<double> d_pattern(static_cast<size_t>(cfg.n_patterns) * 64);

    auto pack = [&] {
        for (size_t f = 0; f < free_grids.size(); ++f) {
            const double* src = logits.grid(free_grids[f]);
            std::copy(src, src + 64, params.data() + f * 64);
        }
        net.export_params(params.data() + n_logit_params);
    };
    auto unpack = [&] {
        for (size_t f = 0; f < free_grids.size(); ++f) {
            std::copy(params.data() + f * 64, params.data() + f * 64 + 64,
                      logits.grid(free_grids[f]));
        }
        net.import_params(params.data() + n_logit_params);
    };
    pack();

    Adam opt(params.size(), cfg.adam);
    std::vector<size_t> order(n_train);
    std::vector<LightField> val_set(dataset.begin() + static_cast<long>(n_train), dataset.end());

    std::vector<EpochStats> history;
    history.reserve(static_cast<size_t>(cfg.epochs));
    double s = cfg.s_init;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (size_t i = 0; i < n_train; ++i) order[i] = i;
        for (size_t i = n_train; i-- > 1;) {
            size_t j = rng::below(rng::key(cfg.seed, kTagShuffle, static_cast<uint64_t>(epoch), i),
                                  i + 1);
            std::swap(order[i], order[j]);
        }

        double epoch_loss = 0.0;
        int64_t epoch_events = 0;
        for (size_t b0 = 0; b0 < n_train; b0 += static_cast<size_t>(cfg.batch_size)) {
            size_t b1 = std::min(n_train, b0 + static_cast<size_t>(cfg.batch_size));
            std::fill(grads.begin(), grads.end(), 0.0);
            std::vector<AperturePattern> patterns = patterns_from_logits(logits, s);
            for (size_t bi = b0; bi < b1; ++bi) {
                size_t idx = order[bi];
                SensorConfig si = with_seed(
                    cfg.sensor, rng::key(cfg.sensor.seed, kTagTrainNoise,
                                         static_cast<uint64_t>(epoch), idx));
                AcquireTrace trace = acquire_trace(dataset[idx], patterns, si, model);
                Tensor target = lf_to_tensor(dataset[idx]);
                NetTrace nt;
                Tensor pred = net.forward(trace.events, nt);
                auto [loss, dpred] = mse_loss(pred, target);
                epoch_loss += loss;
                epoch_events += trace.abs_events;

                Tensor devents = net.backward(nt, dpred, grads.data() + n_logit_params);
                std::fill(d_pattern.begin(), d_pattern.end(), 0.0);
                acquire_backward(trace, dataset[idx], si, model, devents, d_pattern.data());
                for (size_t f = 0; f < free_grids.size(); ++f) {
                    int g = free_grids[f];
                    const double* da = d_pattern.data() + static_cast<size_t>(g) * 64;
                    const AperturePattern& a = patterns[static_cast<size_t>(g)];
                    for (int j = 0; j < 64; ++j) {
                        double av = a.values()[static_cast<size_t>(j)];
                        grads[f * 64 + static_cast<size_t>(j)] += da[j] * s * av * (1.0 - av);
                    }
                }
            }
            double inv = 1.0 / static_cast<double>(b1 - b0);
            for (double& g : grads) g *= inv;
            opt.step(params.data(), grads.data());
            unpack();
        }

        std::vector<AperturePattern> patterns = patterns_from_logits(logits, s);
        EpochStats stats;
        stats.epoch = epoch;
        stats.s = s;
        stats.train_loss = epoch_loss / static_cast<double>(n_train);
        stats.val_loss = val_set.empty()
                             ? std::numeric_limits<double>::quiet_NaN()
                             : eval_mse(val_set, patterns, net, cfg.sensor, model);
        stats.mean_events_per_pixel =
            static_cast<double>(epoch_events) /
            (static_cast<double>(n_train) * static_cast<double>(w) * static_cast<double>(h));
        stats.min_transmittance = patterns.front().total_transmittance();
        for (const AperturePattern& p : patterns)
            stats.min_transmittance = std::min(stats.min_transmittance, p.total_transmittance());
        history.push_back(stats);
        s *= cfg.s_growth;
    }

    TrainResult result{std::move(logits), std::move(net), {}, std::move(history), s};
    result.patterns = patterns_from_logits(result.logits, s);
    return result;
}

}  // namespace celf
