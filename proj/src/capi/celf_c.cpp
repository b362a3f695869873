#include "celf/celf.h"

#include <algorithm>
#include <cstring>
#include <string>
#include <vector>

#include "core/errors.hpp"
#include "core/rng.hpp"
#include "core/event_algebra.hpp"
#include "core/event_sim.hpp"
#include "core/io_formats.hpp"
#include "core/lightfield.hpp"
#include "core/metrics.hpp"
#include "core/png_io.hpp"
#include "core/recnet.hpp"
#include "core/trainer.hpp"

struct celf_lightfield {
    celf::LightField lf;
};
struct celf_patterns {
    std::vector<celf::AperturePattern> items;
};
struct celf_events {
    std::vector<celf::EventImage> items;
};
struct celf_stream {
    celf::EventStream stream;
};
struct celf_recnet {
    celf::ReconNet net;
};
struct celf_train_result {
    celf::TrainResult result;
};

namespace {

thread_local std::string g_last_error;

celf_status map_current_exception() {
    try {
        throw;
    } catch (const celf::InvalidArgument& e) {
        g_last_error = e.what();
        return CELF_ERR_INVALID_ARGUMENT;
    } catch (const celf::DimensionMismatch& e) {
        g_last_error = e.what();
        return CELF_ERR_DIMENSION_MISMATCH;
    } catch (const celf::IoError& e) {
        g_last_error = e.what();
        return CELF_ERR_IO;
    } catch (const celf::FormatError& e) {
        g_last_error = e.what();
        return CELF_ERR_FORMAT;
    } catch (const celf::StateError& e) {
        g_last_error = e.what();
        return CELF_ERR_STATE;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return CELF_ERR_UNKNOWN;
    } catch (...) {
        g_last_error = "unknown error";
        return CELF_ERR_UNKNOWN;
    }
}

template <typename F>
celf_status guarded(F&& fn) {
    try {
        fn();
        return CELF_OK;
    } catch (...) {
        return map_current_exception();
    }
}

template <typename T, typename F>
T* make_handle(F&& fn) {
    T* out = nullptr;
    guarded([&] { out = fn(); });
    return out;
}

void require(const void* p, const char* name) {
    if (!p) celf::fail_invalid(std::string(name) + " must not be NULL");
}

celf::SensorConfig to_sensor(const celf_sensor_config* cfg) {
    require(cfg, "sensor config");
    celf::SensorConfig s;
    s.tau = cfg->tau;
    s.epsilon = cfg->epsilon;
    s.sigma_w = cfg->sigma_w;
    s.sigma_z = cfg->sigma_z;
    s.seed = cfg->seed;
    s.noiseless = cfg->noiseless != 0;
    s.validate();
    return s;
}

celf::EventModel to_model(celf_event_model model) {
    switch (model) {
        case CELF_MODEL_BASELINE: return celf::EventModel::Baseline;
        case CELF_MODEL_REFERENCE_AWARE: return celf::EventModel::ReferenceAware;
    }
    celf::fail_invalid("unknown event model value");
}

celf::TrainMode to_mode(celf_train_mode mode) {
    switch (mode) {
        case CELF_MODE_BASELINE: return celf::TrainMode::Baseline;
        case CELF_MODE_BASELINE_BF: return celf::TrainMode::BaselineBF;
        case CELF_MODE_BASELINE_RA: return celf::TrainMode::BaselineRA;
        case CELF_MODE_BASELINE_BF_RA: return celf::TrainMode::BaselineBFRA;
    }
    celf::fail_invalid("unknown train mode value");
}

int check_index(int index, size_t count, const char* what) {
    if (index < 0 || static_cast<size_t>(index) >= count)
        celf::fail_invalid(std::string(what) + " index out of range");
    return index;
}

}  // namespace

extern "C" {

const char* celf_version(void) { return "1.0.0"; }

const char* celf_last_error(void) { return g_last_error.c_str(); }

void celf_sensor_config_default(celf_sensor_config* cfg) {
    if (!cfg) return;
    cfg->tau = 0.30;
    cfg->epsilon = 0.01;
    cfg->sigma_w = 0.175;
    cfg->sigma_z = 0.04;
    cfg->seed = 0;
    cfg->noiseless = 0;
}

/* ---- light fields ---- */

celf_lightfield* celf_lightfield_create(int width, int height) {
    return make_handle<celf_lightfield>(
        [&] { return new celf_lightfield{celf::LightField(width, height)}; });
}

celf_lightfield* celf_lightfield_synth(uint64_t seed, int width, int height, int layers) {
    return make_handle<celf_lightfield>([&] {
        return new celf_lightfield{celf::synth_lightfield(seed, width, height, layers)};
    });
}

celf_lightfield* celf_lightfield_load(const char* path) {
    return make_handle<celf_lightfield>([&] {
        require(path, "path");
        return new celf_lightfield{celf::load_lightfield(path)};
    });
}

celf_lightfield* celf_lightfield_load_dir(const char* dir) {
    return make_handle<celf_lightfield>([&] {
        require(dir, "dir");
        return new celf_lightfield{celf::load_lightfield_dir(dir)};
    });
}

celf_lightfield* celf_lightfield_patch(const celf_lightfield* lf, int x0, int y0, int size) {
    return make_handle<celf_lightfield>([&] {
        require(lf, "light field");
        if (size <= 0) celf::fail_invalid("patch size must be positive");
        if (x0 < 0 || y0 < 0 || x0 + size > lf->lf.width() || y0 + size > lf->lf.height())
            celf::fail_invalid("patch does not fit inside the light field");
        celf::LightField patch(size, size);
        for (int y = 0; y < size; ++y) {
            for (int x = 0; x < size; ++x) {
                size_t src = lf->lf.index(x0 + x, y0 + y, 0, 0);
                size_t dst = patch.index(x, y, 0, 0);
                std::copy(lf->lf.values().begin() + static_cast<long>(src),
                          lf->lf.values().begin() + static_cast<long>(src) + 64,
                          patch.values().begin() + static_cast<long>(dst));
            }
        }
        return new celf_lightfield{std::move(patch)};
    });
}

void celf_lightfield_free(celf_lightfield* lf) { delete lf; }

int celf_lightfield_width(const celf_lightfield* lf) { return lf ? lf->lf.width() : 0; }

int celf_lightfield_height(const celf_lightfield* lf) { return lf ? lf->lf.height() : 0; }

celf_status celf_lightfield_save(const celf_lightfield* lf, const char* path) {
    return guarded([&] {
        require(lf, "light field");
        require(path, "path");
        celf::save_lightfield(lf->lf, path);
    });
}

celf_status celf_lightfield_save_dir(const celf_lightfield* lf, const char* dir, int bit_depth) {
    return guarded([&] {
        require(lf, "light field");
        require(dir, "dir");
        celf::save_lightfield_dir(lf->lf, dir, bit_depth);
    });
}

celf_status celf_lightfield_get(const celf_lightfield* lf, int x, int y, int u, int v,
                                double* out) {
    return guarded([&] {
        require(lf, "light field");
        require(out, "out");
        if (x < 0 || x >= lf->lf.width() || y < 0 || y >= lf->lf.height() || u < 0 || u >= 8 ||
            v < 0 || v >= 8)
            celf::fail_invalid("light-field coordinates out of range");
        *out = lf->lf.at(x, y, u, v);
    });
}

celf_status celf_lightfield_set(celf_lightfield* lf, int x, int y, int u, int v, double value) {
    return guarded([&] {
        require(lf, "light field");
        if (x < 0 || x >= lf->lf.width() || y < 0 || y >= lf->lf.height() || u < 0 || u >= 8 ||
            v < 0 || v >= 8)
            celf::fail_invalid("light-field coordinates out of range");
        if (!(value >= 0.0 && value <= 1.0)) celf::fail_invalid("light-field value outside [0,1]");
        lf->lf.set(x, y, u, v, value);
    });
}

celf_status celf_lightfield_read(const celf_lightfield* lf, double* buffer, size_t len) {
    return guarded([&] {
        require(lf, "light field");
        require(buffer, "buffer");
        if (len != lf->lf.values().size()) celf::fail_dims("buffer length must equal W*H*64");
        std::copy(lf->lf.values().begin(), lf->lf.values().end(), buffer);
    });
}

celf_status celf_lightfield_write(celf_lightfield* lf, const double* buffer, size_t len) {
    return guarded([&] {
        require(lf, "light field");
        require(buffer, "buffer");
        if (len != lf->lf.values().size()) celf::fail_dims("buffer length must equal W*H*64");
        celf::LightField next = celf::LightField::from_buffer(
            lf->lf.width(), lf->lf.height(), std::vector<double>(buffer, buffer + len));
        lf->lf = std::move(next);
    });
}

celf_status celf_lightfield_view(const celf_lightfield* lf, int u, int v, double* buffer,
                                 size_t len) {
    return guarded([&] {
        require(lf, "light field");
        require(buffer, "buffer");
        if (u < 0 || u >= 8 || v < 0 || v >= 8) celf::fail_invalid("view index out of range");
        std::vector<double> view = lf->lf.view(u, v);
        if (len != view.size()) celf::fail_dims("buffer length must equal W*H");
        std::copy(view.begin(), view.end(), buffer);
    });
}

celf_status celf_psnr(const celf_lightfield* ref, const celf_lightfield* est, double* out) {
    return guarded([&] {
        require(ref, "ref");
        require(est, "est");
        require(out, "out");
        *out = celf::psnr(ref->lf, est->lf);
    });
}

celf_status celf_lf_ssim(const celf_lightfield* ref, const celf_lightfield* est, double* out) {
    return guarded([&] {
        require(ref, "ref");
        require(est, "est");
        require(out, "out");
        *out = celf::lf_ssim(ref->lf, est->lf);
    });
}

celf_status celf_code_image(const celf_lightfield* lf, const celf_patterns* patterns, int index,
                            int normalized, double* buffer, size_t len) {
    return guarded([&] {
        require(lf, "light field");
        require(patterns, "patterns");
        require(buffer, "buffer");
        check_index(index, patterns->items.size(), "pattern");
        celf::CodedImage img = celf::code_image(lf->lf, patterns->items[static_cast<size_t>(index)]);
        if (normalized) img = celf::normalize(img);
        if (len != img.values().size()) celf::fail_dims("buffer length must equal W*H");
        std::copy(img.values().begin(), img.values().end(), buffer);
    });
}

celf_status celf_write_png_gray(const char* path, const double* values, int width, int height,
                                int bit_depth) {
    return guarded([&] {
        require(path, "path");
        require(values, "values");
        if (width <= 0 || height <= 0) celf::fail_invalid("dimensions must be positive");
        size_t n = static_cast<size_t>(width) * static_cast<size_t>(height);
        celf::write_png_gray(path, std::vector<double>(values, values + n), width, height,
                             bit_depth);
    });
}

/* ---- patterns ---- */

celf_patterns* celf_patterns_create(int count) {
    return make_handle<celf_patterns>([&] {
        if (count <= 0) celf::fail_invalid("pattern count must be positive");
        return new celf_patterns{std::vector<celf::AperturePattern>(
            static_cast<size_t>(count), celf::AperturePattern::black())};
    });
}

celf_patterns* celf_patterns_random_binary(int count, uint64_t seed, int black_first) {
    return make_handle<celf_patterns>([&] {
        if (count <= 0) celf::fail_invalid("pattern count must be positive");
        std::vector<celf::AperturePattern> items;
        items.reserve(static_cast<size_t>(count));
        for (int i = 0; i < count; ++i) {
            if (black_first && i == 0) {
                items.push_back(celf::AperturePattern::black());
            } else {
                items.push_back(celf::AperturePattern::random_binary(
                    celf::rng::key(seed, static_cast<uint64_t>(i))));
            }
        }
        return new celf_patterns{std::move(items)};
    });
}

celf_patterns* celf_patterns_load(const char* path) {
    return make_handle<celf_patterns>([&] {
        require(path, "path");
        return new celf_patterns{celf::load_patterns(path)};
    });
}

void celf_patterns_free(celf_patterns* p) { delete p; }

int celf_patterns_count(const celf_patterns* p) {
    return p ? static_cast<int>(p->items.size()) : 0;
}

celf_status celf_patterns_save(const celf_patterns* p, const char* path) {
    return guarded([&] {
        require(p, "patterns");
        require(path, "path");
        celf::save_patterns(p->items, path);
    });
}

celf_status celf_patterns_get(const celf_patterns* p, int index, double out[64]) {
    return guarded([&] {
        require(p, "patterns");
        require(out, "out");
        check_index(index, p->items.size(), "pattern");
        const auto& v = p->items[static_cast<size_t>(index)].values();
        std::copy(v.begin(), v.end(), out);
    });
}

celf_status celf_patterns_set(celf_patterns* p, int index, const double values[64]) {
    return guarded([&] {
        require(p, "patterns");
        require(values, "values");
        check_index(index, p->items.size(), "pattern");
        std::array<double, 64> a;
        std::copy(values, values + 64, a.begin());
        p->items[static_cast<size_t>(index)] = celf::AperturePattern::from_array(a);
    });
}

celf_status celf_patterns_total(const celf_patterns* p, int index, double* out) {
    return guarded([&] {
        require(p, "patterns");
        require(out, "out");
        check_index(index, p->items.size(), "pattern");
        *out = p->items[static_cast<size_t>(index)].total_transmittance();
    });
}

celf_patterns* celf_patterns_binarize(const celf_patterns* p) {
    return make_handle<celf_patterns>([&] {
        require(p, "patterns");
        return new celf_patterns{celf::binarize_patterns(p->items)};
    });
}

/* ---- event simulation ---- */

celf_events* celf_simulate(const celf_lightfield* lf, const celf_patterns* patterns,
                           const celf_sensor_config* cfg, celf_event_model model) {
    return make_handle<celf_events>([&] {
        require(lf, "light field");
        require(patterns, "patterns");
        return new celf_events{
            celf::simulate_sequence(lf->lf, patterns->items, to_sensor(cfg), to_model(model))};
    });
}

celf_events* celf_acquire(const celf_lightfield* lf, const celf_patterns* patterns,
                          const celf_sensor_config* cfg, celf_event_model model) {
    return make_handle<celf_events>([&] {
        require(lf, "light field");
        require(patterns, "patterns");
        return new celf_events{celf::acquire_event_images(lf->lf, patterns->items, to_sensor(cfg),
                                                          to_model(model))};
    });
}

celf_events* celf_events_load(const char* const* paths, int count) {
    return make_handle<celf_events>([&] {
        require(paths, "paths");
        if (count <= 0) celf::fail_invalid("event image count must be positive");
        std::vector<celf::EventImage> items;
        items.reserve(static_cast<size_t>(count));
        for (int i = 0; i < count; ++i) {
            require(paths[i], "path");
            items.push_back(celf::load_event_image(paths[i]));
        }
        for (const celf::EventImage& e : items) {
            if (e.width() != items.front().width() || e.height() != items.front().height())
                celf::fail_dims("event images differ in size");
        }
        return new celf_events{std::move(items)};
    });
}

void celf_events_free(celf_events* e) { delete e; }

int celf_events_count(const celf_events* e) { return e ? static_cast<int>(e->items.size()) : 0; }

celf_status celf_events_dims(const celf_events* e, int* width, int* height) {
    return guarded([&] {
        require(e, "events");
        if (e->items.empty()) celf::fail_invalid("empty event stack");
        if (width) *width = e->items.front().width();
        if (height) *height = e->items.front().height();
    });
}

celf_status celf_events_get(const celf_events* e, int index, int32_t* buffer, size_t len) {
    return guarded([&] {
        require(e, "events");
        require(buffer, "buffer");
        check_index(index, e->items.size(), "event image");
        const auto& v = e->items[static_cast<size_t>(index)].values();
        if (len != v.size()) celf::fail_dims("buffer length must equal W*H");
        std::copy(v.begin(), v.end(), buffer);
    });
}

celf_status celf_events_transition(const celf_events* e, int index, int* from, int* to) {
    return guarded([&] {
        require(e, "events");
        check_index(index, e->items.size(), "event image");
        if (from) *from = e->items[static_cast<size_t>(index)].from();
        if (to) *to = e->items[static_cast<size_t>(index)].to();
    });
}

celf_status celf_events_abs_sum(const celf_events* e, int index, int64_t* out) {
    return guarded([&] {
        require(e, "events");
        require(out, "out");
        check_index(index, e->items.size(), "event image");
        *out = e->items[static_cast<size_t>(index)].abs_sum();
    });
}

celf_status celf_events_save(const celf_events* e, int index, const char* path) {
    return guarded([&] {
        require(e, "events");
        require(path, "path");
        check_index(index, e->items.size(), "event image");
        celf::save_event_image(e->items[static_cast<size_t>(index)], path);
    });
}

/* ---- event algebra ---- */

celf_status celf_log_gap(int64_t event_sum, const celf_sensor_config* cfg, double* out) {
    return guarded([&] {
        require(out, "out");
        *out = celf::log_gap(event_sum, to_sensor(cfg));
    });
}

celf_status celf_virtual_event(const celf_events* e, int from, int to, int32_t* buffer,
                               size_t len) {
    return guarded([&] {
        require(e, "events");
        require(buffer, "buffer");
        celf::EventImage v = celf::virtual_event(e->items, from, to);
        if (len != v.values().size()) celf::fail_dims("buffer length must equal W*H");
        std::copy(v.values().begin(), v.values().end(), buffer);
    });
}

celf_status celf_recover(const celf_events* e, int black_index, const celf_sensor_config* cfg,
                         double* buffer, size_t len, int64_t* clamped_pixels) {
    return guarded([&] {
        require(e, "events");
        require(buffer, "buffer");
        celf::RecoveredIntensities rec =
            celf::recover_intensities(e->items, black_index, to_sensor(cfg));
        size_t need = 0;
        for (const celf::CodedImage& img : rec.images) need += img.values().size();
        if (len != need) celf::fail_dims("buffer length must equal N*W*H");
        double* dst = buffer;
        for (const celf::CodedImage& img : rec.images) {
            std::copy(img.values().begin(), img.values().end(), dst);
            dst += img.values().size();
        }
        if (clamped_pixels) *clamped_pixels = rec.clamped_pixels;
    });
}

celf_status celf_permute_check(const celf_lightfield* lf, const celf_patterns* patterns,
                               const int* perm, const celf_sensor_config* cfg,
                               celf_event_model model, int64_t* max_abs_discrepancy,
                               double* frac_within_one) {
    return guarded([&] {
        require(lf, "light field");
        require(patterns, "patterns");
        require(perm, "perm");
        std::vector<int> p(perm, perm + patterns->items.size());
        celf::PermuteReport report =
            celf::permute_check(lf->lf, patterns->items, p, to_sensor(cfg), to_model(model));
        if (max_abs_discrepancy) *max_abs_discrepancy = report.max_abs_discrepancy;
        if (frac_within_one) *frac_within_one = report.frac_within_one;
    });
}

/* ---- streams ---- */

celf_stream* celf_stream_expand(const celf_events* e, const uint32_t* durations_us, int count) {
    return make_handle<celf_stream>([&] {
        require(e, "events");
        require(durations_us, "durations");
        if (count != static_cast<int>(e->items.size()))
            celf::fail_dims("one duration per event image required");
        std::vector<uint32_t> d(durations_us, durations_us + count);
        return new celf_stream{celf::expand_to_stream(e->items, d)};
    });
}

celf_stream* celf_stream_load(const char* path) {
    return make_handle<celf_stream>([&] {
        require(path, "path");
        return new celf_stream{celf::load_event_stream(path)};
    });
}

void celf_stream_free(celf_stream* s) { delete s; }

celf_status celf_stream_save(const celf_stream* s, const char* path) {
    return guarded([&] {
        require(s, "stream");
        require(path, "path");
        celf::save_event_stream(s->stream, path);
    });
}

celf_status celf_stream_dims(const celf_stream* s, int* width, int* height) {
    return guarded([&] {
        require(s, "stream");
        if (width) *width = s->stream.width();
        if (height) *height = s->stream.height();
    });
}

celf_status celf_stream_count(const celf_stream* s, uint64_t* out) {
    return guarded([&] {
        require(s, "stream");
        require(out, "out");
        *out = s->stream.records().size();
    });
}

celf_status celf_stream_accumulate(const celf_stream* s, uint32_t t0, uint32_t t1, int32_t* buffer,
                                   size_t len) {
    return guarded([&] {
        require(s, "stream");
        require(buffer, "buffer");
        celf::EventImage img = celf::accumulate_stream(s->stream, t0, t1);
        if (len != img.values().size()) celf::fail_dims("buffer length must equal W*H");
        std::copy(img.values().begin(), img.values().end(), buffer);
    });
}

/* ---- reconstruction network ---- */

celf_recnet* celf_recnet_create(int in_channels, const int* widths, int layer_count,
                                uint64_t seed) {
    return make_handle<celf_recnet>([&] {
        std::vector<int> w;
        if (widths && layer_count > 0) {
            w.assign(widths, widths + layer_count);
        } else {
            w = celf::ReconNet::default_widths();
        }
        return new celf_recnet{celf::ReconNet(in_channels, w, seed)};
    });
}

celf_recnet* celf_recnet_load(const char* path) {
    return make_handle<celf_recnet>([&] {
        require(path, "path");
        return new celf_recnet{celf::load_recnet(path)};
    });
}

void celf_recnet_free(celf_recnet* net) { delete net; }

celf_status celf_recnet_save(const celf_recnet* net, const char* path) {
    return guarded([&] {
        require(net, "network");
        require(path, "path");
        celf::save_recnet(net->net, path);
    });
}

int celf_recnet_in_channels(const celf_recnet* net) { return net ? net->net.in_channels() : 0; }

int celf_recnet_layer_count(const celf_recnet* net) { return net ? net->net.layer_count() : 0; }

celf_lightfield* celf_reconstruct(const celf_lightfield* lf, const celf_patterns* patterns,
                                  const celf_recnet* net, const celf_sensor_config* cfg,
                                  celf_event_model model) {
    return make_handle<celf_lightfield>([&] {
        require(lf, "light field");
        require(patterns, "patterns");
        require(net, "network");
        return new celf_lightfield{celf::reconstruct(lf->lf, patterns->items, net->net,
                                                     to_sensor(cfg), to_model(model))};
    });
}

celf_status celf_eval_mse(const celf_lightfield* const* samples, size_t count,
                          const celf_patterns* patterns, const celf_recnet* net,
                          const celf_sensor_config* cfg, celf_event_model model, double* out) {
    return guarded([&] {
        require(samples, "samples");
        require(patterns, "patterns");
        require(net, "network");
        require(out, "out");
        std::vector<celf::LightField> fields;
        fields.reserve(count);
        for (size_t i = 0; i < count; ++i) {
            require(samples[i], "sample");
            fields.push_back(samples[i]->lf);
        }
        *out = celf::eval_mse(fields, patterns->items, net->net, to_sensor(cfg), to_model(model));
    });
}

/* ---- training ---- */

void celf_train_config_default(celf_train_config* cfg) {
    if (!cfg) return;
    cfg->n_patterns = 4;
    cfg->epochs = 600;
    cfg->batch_size = 16;
    cfg->mode = CELF_MODE_BASELINE_BF_RA;
    cfg->s_init = 1.0;
    cfg->s_growth = 1.02;
    cfg->lr = 1e-3;
    celf_sensor_config_default(&cfg->sensor);
    cfg->seed = 0;
    cfg->net_widths = NULL;
    cfg->net_layer_count = 0;
}

celf_train_result* celf_train(const celf_lightfield* const* samples, size_t count,
                              const celf_train_config* cfg) {
    return make_handle<celf_train_result>([&] {
        require(samples, "samples");
        require(cfg, "train config");
        std::vector<celf::LightField> fields;
        fields.reserve(count);
        for (size_t i = 0; i < count; ++i) {
            require(samples[i], "sample");
            fields.push_back(samples[i]->lf);
        }
        celf::TrainConfig tc;
        tc.n_patterns = cfg->n_patterns;
        tc.epochs = cfg->epochs;
        tc.batch_size = cfg->batch_size;
        tc.mode = to_mode(cfg->mode);
        tc.s_init = cfg->s_init;
        tc.s_growth = cfg->s_growth;
        tc.adam.lr = cfg->lr;
        tc.sensor = to_sensor(&cfg->sensor);
        tc.seed = cfg->seed;
        if (cfg->net_widths && cfg->net_layer_count > 0) {
            tc.net_widths.assign(cfg->net_widths, cfg->net_widths + cfg->net_layer_count);
        }
        return new celf_train_result{celf::train(fields, tc)};
    });
}

void celf_train_result_free(celf_train_result* r) { delete r; }

int celf_train_result_epochs(const celf_train_result* r) {
    return r ? static_cast<int>(r->result.history.size()) : 0;
}

celf_status celf_train_result_epoch(const celf_train_result* r, int index, double* s,
                                    double* train_loss, double* val_loss,
                                    double* events_per_pixel, double* min_transmittance) {
    return guarded([&] {
        require(r, "train result");
        check_index(index, r->result.history.size(), "epoch");
        const celf::EpochStats& e = r->result.history[static_cast<size_t>(index)];
        if (s) *s = e.s;
        if (train_loss) *train_loss = e.train_loss;
        if (val_loss) *val_loss = e.val_loss;
        if (events_per_pixel) *events_per_pixel = e.mean_events_per_pixel;
        if (min_transmittance) *min_transmittance = e.min_transmittance;
    });
}

celf_patterns* celf_train_result_patterns(const celf_train_result* r) {
    return make_handle<celf_patterns>([&] {
        require(r, "train result");
        return new celf_patterns{r->result.patterns};
    });
}

celf_recnet* celf_train_result_recnet(const celf_train_result* r) {
    return make_handle<celf_recnet>([&] {
        require(r, "train result");
        return new celf_recnet{r->result.net};
    });
}

double celf_train_result_final_s(const celf_train_result* r) {
    return r ? r->result.final_s : 0.0;
}

/* ---- metrics ---- */

celf_status celf_ssim_image(const double* ref, const double* est, int width, int height,
                            double* out) {
    return guarded([&] {
        require(ref, "ref");
        require(est, "est");
        require(out, "out");
        size_t n = static_cast<size_t>(width) * static_cast<size_t>(height);
        *out = celf::ssim(std::vector<double>(ref, ref + n), std::vector<double>(est, est + n),
                          width, height);
    });
}

celf_status celf_data_rate(double events_per_pixel, int bits_per_event,
                           double* sensor_bits_per_pixel, double* lf_bits_per_pixel,
                           double* events_per_lf_pixel) {
    return guarded([&] {
        celf::DataRate r = celf::data_rate(events_per_pixel, bits_per_event);
        if (sensor_bits_per_pixel) *sensor_bits_per_pixel = r.sensor_bits_per_pixel;
        if (lf_bits_per_pixel) *lf_bits_per_pixel = r.lf_bits_per_pixel;
        if (events_per_lf_pixel) *events_per_lf_pixel = r.events_per_lf_pixel;
    });
}

}  // extern "C"
