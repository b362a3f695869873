#include <CLI11.hpp>
#include <celf/celf.h>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

[[noreturn]] void die(const std::string& msg) {
    std::fprintf(stderr, "error: %s\n", msg.c_str());
    std::exit(1);
}

void ok(celf_status st) {
    if (st != CELF_OK) die(celf_last_error());
}

template <typename T>
T* need(T* p) {
    if (!p) die(celf_last_error());
    return p;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) die("empty entry in list: " + text);
        out.push_back(std::stoi(item));
    }
    if (out.empty()) die("empty list: " + text);
    return out;
}

std::string zero_pad(int v, int width) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%0*d", width, v);
    return buf;
}

void ensure_parent(const std::string& path) {
    fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

std::vector<std::string> list_files(const std::string& dir, const std::string& ext) {
    if (!fs::is_directory(dir)) die("not a directory: " + dir);
    std::vector<std::string> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ext)
            out.push_back(entry.path().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string env_data_dir() {
    const char* v = std::getenv("CELF_DATA_DIR");
    return v ? std::string(v) : std::string();
}

std::string resolve_dir(const std::string& flag_value, const std::string& what) {
    if (!flag_value.empty()) return flag_value;
    std::string env = env_data_dir();
    if (!env.empty()) return env;
    die(what + " not given and CELF_DATA_DIR is unset");
}

struct SensorOpts {
    double tau = 0.30;
    double epsilon = 0.01;
    double sigma_w = 0.175;
    double sigma_z = 0.04;
    uint64_t seed = 0;
    bool noiseless = false;

    celf_sensor_config to_config() const {
        celf_sensor_config cfg;
        celf_sensor_config_default(&cfg);
        cfg.tau = tau;
        cfg.epsilon = epsilon;
        cfg.sigma_w = sigma_w;
        cfg.sigma_z = sigma_z;
        cfg.seed = seed;
        cfg.noiseless = noiseless ? 1 : 0;
        return cfg;
    }
};

void add_sensor_flags(CLI::App* cmd, SensorOpts& s) {
    cmd->add_option("--tau", s.tau, "contrast threshold");
    cmd->add_option("--epsilon", s.epsilon, "log-domain dark bias");
    cmd->add_option("--sigma-w", s.sigma_w, "additive log-noise std");
    cmd->add_option("--sigma-z", s.sigma_z, "threshold-noise std");
    cmd->add_option("--seed", s.seed, "seed for all stochastic behavior");
    cmd->add_flag("--noiseless", s.noiseless, "disable sensor noise");
}

celf_event_model parse_model(const std::string& name) {
    if (name == "baseline") return CELF_MODEL_BASELINE;
    if (name == "ra" || name == "reference-aware") return CELF_MODEL_REFERENCE_AWARE;
    die("unknown event model: " + name + " (use baseline|ra)");
}

celf_train_mode parse_mode(const std::string& name) {
    if (name == "baseline") return CELF_MODE_BASELINE;
    if (name == "baseline+BF" || name == "baseline+bf") return CELF_MODE_BASELINE_BF;
    if (name == "baseline+RA" || name == "baseline+ra") return CELF_MODE_BASELINE_RA;
    if (name == "baseline+BF+RA" || name == "baseline+bf+ra") return CELF_MODE_BASELINE_BF_RA;
    die("unknown mode: " + name);
}

celf_event_model mode_model(celf_train_mode mode) {
    return (mode == CELF_MODE_BASELINE_RA || mode == CELF_MODE_BASELINE_BF_RA)
               ? CELF_MODEL_REFERENCE_AWARE
               : CELF_MODEL_BASELINE;
}

using LfPtr = std::unique_ptr<celf_lightfield, decltype(&celf_lightfield_free)>;
using PatPtr = std::unique_ptr<celf_patterns, decltype(&celf_patterns_free)>;
using EvPtr = std::unique_ptr<celf_events, decltype(&celf_events_free)>;
using StreamPtr = std::unique_ptr<celf_stream, decltype(&celf_stream_free)>;
using NetPtr = std::unique_ptr<celf_recnet, decltype(&celf_recnet_free)>;
using TrainPtr = std::unique_ptr<celf_train_result, decltype(&celf_train_result_free)>;

LfPtr wrap(celf_lightfield* p) { return {need(p), &celf_lightfield_free}; }
PatPtr wrap(celf_patterns* p) { return {need(p), &celf_patterns_free}; }
EvPtr wrap(celf_events* p) { return {need(p), &celf_events_free}; }
StreamPtr wrap(celf_stream* p) { return {need(p), &celf_stream_free}; }
NetPtr wrap(celf_recnet* p) { return {need(p), &celf_recnet_free}; }
TrainPtr wrap(celf_train_result* p) { return {need(p), &celf_train_result_free}; }

LfPtr load_lightfield_any(const std::string& path) {
    if (fs::is_directory(path)) return wrap(celf_lightfield_load_dir(path.c_str()));
    return wrap(celf_lightfield_load(path.c_str()));
}

void print_event_stats(const celf_events* events) {
    int w = 0, h = 0;
    ok(celf_events_dims(events, &w, &h));
    double px = static_cast<double>(w) * h;
    double total = 0.0;
    for (int i = 0; i < celf_events_count(events); ++i) {
        int64_t sum = 0;
        ok(celf_events_abs_sum(events, i, &sum));
        double per = static_cast<double>(sum) / px;
        total += per;
        int from = 0, to = 0;
        ok(celf_events_transition(events, i, &from, &to));
        std::printf("transition %d->%d: %.4f events/pixel\n", from, to, per);
    }
    std::printf("total: %.4f events/pixel\n", total);
    if (total > 0.0) {
        double sensor_bpp = 0.0, lf_bpp = 0.0, ev_lf = 0.0;
        ok(celf_data_rate(total, 29, &sensor_bpp, &lf_bpp, &ev_lf));
        std::printf("data rate: %.4f bits/pixel (sensor), %.4f bits/pixel (light field)\n",
                    sensor_bpp, lf_bpp);
    }
}

/* ---- simulate ---- */

struct SimulateOpts {
    std::string input;
    std::string patterns_path;
    std::string save_patterns;
    std::string out_dir;
    std::string model = "ra";
    std::string stream_path;
    std::string permute;
    int random_patterns = 0;
    bool black_first = false;
    uint32_t window_us = 1000;
    SensorOpts sensor;
};

void run_simulate(const SimulateOpts& o) {
    LfPtr lf = load_lightfield_any(o.input);
    PatPtr patterns{nullptr, &celf_patterns_free};
    if (!o.patterns_path.empty()) {
        patterns = wrap(celf_patterns_load(o.patterns_path.c_str()));
    } else if (o.random_patterns > 0) {
        patterns = wrap(celf_patterns_random_binary(o.random_patterns, o.sensor.seed,
                                                    o.black_first ? 1 : 0));
    } else {
        die("give --patterns FILE or --random-patterns N");
    }
    if (!o.save_patterns.empty()) {
        ensure_parent(o.save_patterns);
        ok(celf_patterns_save(patterns.get(), o.save_patterns.c_str()));
    }

    celf_sensor_config cfg = o.sensor.to_config();
    celf_event_model model = parse_model(o.model);
    EvPtr events = wrap(celf_simulate(lf.get(), patterns.get(), &cfg, model));

    fs::create_directories(o.out_dir);
    int count = celf_events_count(events.get());
    for (int i = 0; i < count; ++i) {
        std::string path = (fs::path(o.out_dir) / ("events_" + zero_pad(i + 1, 2) + ".ei1")).string();
        ok(celf_events_save(events.get(), i, path.c_str()));
    }
    std::printf("wrote %d event images to %s\n", count, o.out_dir.c_str());
    print_event_stats(events.get());

    if (!o.stream_path.empty()) {
        std::vector<uint32_t> durations(static_cast<size_t>(count), o.window_us);
        StreamPtr stream = wrap(celf_stream_expand(events.get(), durations.data(), count));
        ensure_parent(o.stream_path);
        ok(celf_stream_save(stream.get(), o.stream_path.c_str()));
        uint64_t n = 0;
        ok(celf_stream_count(stream.get(), &n));
        std::printf("stream: %" PRIu64 " events over %u us -> %s\n", n,
                    o.window_us * static_cast<uint32_t>(count), o.stream_path.c_str());
    }

    if (!o.permute.empty()) {
        std::vector<int> perm = parse_int_list(o.permute);
        if (static_cast<int>(perm.size()) != celf_patterns_count(patterns.get()))
            die("permutation length must equal the pattern count");
        celf_sensor_config quiet = cfg;
        quiet.noiseless = 1;
        int64_t max_abs = 0;
        double frac = 0.0;
        ok(celf_permute_check(lf.get(), patterns.get(), perm.data(), &quiet, model, &max_abs,
                              &frac));
        std::printf("permute check: max |discrepancy| = %" PRId64
                    ", fraction within 1 event = %.6f\n",
                    max_abs, frac);
    }
}

/* ---- recover ---- */

struct RecoverOpts {
    std::vector<std::string> event_paths;
    std::string events_dir;
    std::string out_dir;
    std::string truth;
    std::string patterns_path;
    int black_index = 1;
    SensorOpts sensor;
};

void run_recover(const RecoverOpts& o) {
    std::vector<std::string> paths = o.event_paths;
    if (paths.empty() && !o.events_dir.empty()) paths = list_files(o.events_dir, ".ei1");
    if (paths.empty()) die("give --events FILES... or --events-dir DIR");

    std::vector<const char*> cpaths;
    for (const std::string& p : paths) cpaths.push_back(p.c_str());
    EvPtr events = wrap(celf_events_load(cpaths.data(), static_cast<int>(cpaths.size())));

    int w = 0, h = 0;
    ok(celf_events_dims(events.get(), &w, &h));
    int n = celf_events_count(events.get()) + 1;
    size_t plane = static_cast<size_t>(w) * h;
    std::vector<double> recovered(static_cast<size_t>(n) * plane);
    int64_t clamped = 0;
    celf_sensor_config cfg = o.sensor.to_config();
    ok(celf_recover(events.get(), o.black_index, &cfg, recovered.data(), recovered.size(),
                    &clamped));

    fs::create_directories(o.out_dir);
    for (int i = 0; i < n; ++i) {
        const double* plane_data = recovered.data() + static_cast<size_t>(i) * plane;
        std::string base = (fs::path(o.out_dir) / ("recovered_" + zero_pad(i + 1, 2))).string();
        ok(celf_write_png_gray((base + ".png").c_str(), plane_data, w, h, 16));
        std::string tmp = base + ".f32.tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) die("cannot write " + tmp);
            for (size_t j = 0; j < plane; ++j) {
                float v = static_cast<float>(plane_data[j]);
                out.write(reinterpret_cast<const char*>(&v), 4);
            }
        }
        fs::rename(tmp, base + ".f32");
    }
    std::printf("recovered %d intensity images (%dx%d) to %s\n", n, w, h, o.out_dir.c_str());
    std::printf("clamped pixels: %" PRId64 "\n", clamped);

    if (!o.truth.empty()) {
        if (o.patterns_path.empty()) die("--truth needs --patterns to form the coded images");
        LfPtr truth = load_lightfield_any(o.truth);
        PatPtr patterns = wrap(celf_patterns_load(o.patterns_path.c_str()));
        if (celf_patterns_count(patterns.get()) != n) die("pattern count does not match events");
        std::vector<double> coded(plane);
        bool all_below = true;
        for (int i = 0; i < n; ++i) {
            ok(celf_code_image(truth.get(), patterns.get(), i, 1, coded.data(), coded.size()));
            const double* rec = recovered.data() + static_cast<size_t>(i) * plane;
            double worst = 0.0;
            for (size_t j = 0; j < plane; ++j) {
                double d = std::log(rec[j] + o.sensor.epsilon) - std::log(coded[j] + o.sensor.epsilon);
                worst = std::max(worst, std::abs(d));
            }
            all_below = all_below && worst < o.sensor.tau;
            std::printf("image %d: max |log residual| = %.6f (tau = %g)\n", i + 1, worst,
                        o.sensor.tau);
        }
        std::printf("log residual below tau everywhere: %s\n", all_below ? "yes" : "no");
    }
}

/* ---- make-synthetic ---- */

struct SynthOpts {
    std::string out_dir;
    int count = 10;
    int size = 64;
    int layers = 3;
    uint64_t seed = 0;
    bool png = false;
    int bit_depth = 16;
};

void run_make_synthetic(const SynthOpts& o) {
    if (o.count <= 0) die("--count must be positive");
    std::string out = resolve_dir(o.out_dir, "--out");
    fs::create_directories(out);
    for (int i = 0; i < o.count; ++i) {
        LfPtr lf = wrap(celf_lightfield_synth(o.seed + static_cast<uint64_t>(i), o.size, o.size,
                                              o.layers));
        std::string base = (fs::path(out) / ("sample_" + zero_pad(i, 4))).string();
        ok(celf_lightfield_save(lf.get(), (base + ".lf4").c_str()));
        if (o.png) ok(celf_lightfield_save_dir(lf.get(), base.c_str(), o.bit_depth));
    }
    std::printf("wrote %d synthetic light fields (%dx%d, %d layers) to %s\n", o.count, o.size,
                o.size, o.layers, out.c_str());
}

/* ---- train ---- */

struct TrainOpts {
    std::string data_dir;
    std::string out_dir = "train_out";
    std::string config_path;
    std::string mode = "baseline+BF+RA";
    std::string net_widths;
    int n_patterns = 4;
    int epochs = 600;
    int batch_size = 16;
    double s_init = 1.0;
    double s_growth = 1.02;
    double lr = 1e-3;
    SensorOpts sensor;
    bool quiet = false;
};

void apply_config_file(TrainOpts& o) {
    if (o.config_path.empty()) return;
    std::ifstream in(o.config_path);
    if (!in) die("cannot open config: " + o.config_path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = line.substr(0, line.find('#'));
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
        size_t start = 0;
        while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
        s = s.substr(start);
        if (s.empty()) continue;
        size_t eq = s.find('=');
        if (eq == std::string::npos)
            die(o.config_path + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = s.substr(0, eq);
        std::string value = s.substr(eq + 1);
        auto trim = [](std::string& t) {
            while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back()))) t.pop_back();
            size_t b = 0;
            while (b < t.size() && std::isspace(static_cast<unsigned char>(t[b]))) ++b;
            t = t.substr(b);
        };
        trim(key);
        trim(value);
        if (key == "N" || key == "n_patterns") o.n_patterns = std::stoi(value);
        else if (key == "epochs") o.epochs = std::stoi(value);
        else if (key == "batch_size") o.batch_size = std::stoi(value);
        else if (key == "mode") o.mode = value;
        else if (key == "tau") o.sensor.tau = std::stod(value);
        else if (key == "epsilon") o.sensor.epsilon = std::stod(value);
        else if (key == "sigma_w") o.sensor.sigma_w = std::stod(value);
        else if (key == "sigma_z") o.sensor.sigma_z = std::stod(value);
        else if (key == "seed") o.sensor.seed = std::stoull(value);
        else if (key == "lr") o.lr = std::stod(value);
        else if (key == "s_init") o.s_init = std::stod(value);
        else if (key == "s_growth") o.s_growth = std::stod(value);
        else if (key == "noiseless") o.sensor.noiseless = value == "1" || value == "true";
        else if (key == "net_widths") o.net_widths = value;
        else die(o.config_path + ":" + std::to_string(lineno) + ": unknown key " + key);
    }
}

std::vector<LfPtr> load_dataset(const std::string& dir) {
    std::vector<std::string> files = list_files(dir, ".lf4");
    if (files.empty()) die("no .lf4 files in " + dir);
    std::vector<LfPtr> out;
    out.reserve(files.size());
    for (const std::string& f : files) out.push_back(wrap(celf_lightfield_load(f.c_str())));
    return out;
}

void run_train(const TrainOpts& o) {
    std::string data = resolve_dir(o.data_dir, "--data");
    std::vector<LfPtr> dataset = load_dataset(data);
    std::vector<const celf_lightfield*> handles;
    for (const LfPtr& p : dataset) handles.push_back(p.get());

    celf_train_config cfg;
    celf_train_config_default(&cfg);
    cfg.n_patterns = o.n_patterns;
    cfg.epochs = o.epochs;
    cfg.batch_size = o.batch_size;
    cfg.mode = parse_mode(o.mode);
    cfg.s_init = o.s_init;
    cfg.s_growth = o.s_growth;
    cfg.lr = o.lr;
    cfg.sensor = o.sensor.to_config();
    cfg.seed = o.sensor.seed;
    std::vector<int> widths;
    if (!o.net_widths.empty()) {
        widths = parse_int_list(o.net_widths);
        cfg.net_widths = widths.data();
        cfg.net_layer_count = static_cast<int>(widths.size());
    }

    std::printf("training on %zu samples (%s, N=%d, %d epochs, batch %d)\n", handles.size(),
                o.mode.c_str(), o.n_patterns, o.epochs, o.batch_size);
    TrainPtr result = wrap(celf_train(handles.data(), handles.size(), &cfg));

    fs::create_directories(o.out_dir);
    std::string history_path = (fs::path(o.out_dir) / "history.csv").string();
    {
        std::string tmp = history_path + ".tmp";
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) die("cannot write " + tmp);
        out << "epoch,s,train_loss,val_loss,events_per_pixel,min_transmittance\n";
        for (int i = 0; i < celf_train_result_epochs(result.get()); ++i) {
            double s = 0, tl = 0, vl = 0, epp = 0, mt = 0;
            ok(celf_train_result_epoch(result.get(), i, &s, &tl, &vl, &epp, &mt));
            out << (i + 1) << ',' << fmt(s) << ',' << fmt(tl) << ',' << fmt(vl) << ',' << fmt(epp)
                << ',' << fmt(mt) << '\n';
            if (!o.quiet)
                std::printf("epoch %d: s=%.4f train=%.6f val=%.6f events/px=%.3f min_T=%.3f\n",
                            i + 1, s, tl, vl, epp, mt);
        }
    }
    fs::rename(history_path + ".tmp", history_path);

    PatPtr patterns = wrap(celf_train_result_patterns(result.get()));
    NetPtr net = wrap(celf_train_result_recnet(result.get()));
    PatPtr binary = wrap(celf_patterns_binarize(patterns.get()));
    std::string net_path = (fs::path(o.out_dir) / "recnet.nn1").string();
    std::string pat_path = (fs::path(o.out_dir) / "patterns.ap1").string();
    std::string bin_path = (fs::path(o.out_dir) / "patterns_binary.ap1").string();
    ok(celf_recnet_save(net.get(), net_path.c_str()));
    ok(celf_patterns_save(patterns.get(), pat_path.c_str()));
    ok(celf_patterns_save(binary.get(), bin_path.c_str()));
    std::printf("final s: %s\n", fmt(celf_train_result_final_s(result.get())).c_str());
    std::printf("wrote %s, %s, %s, %s\n", net_path.c_str(), pat_path.c_str(), bin_path.c_str(),
                history_path.c_str());
}

/* ---- eval ---- */

struct EvalOpts {
    std::string data_dir;
    std::string net_path;
    std::string patterns_path;
    std::string out_dir = "eval_out";
    std::string mode = "baseline+BF+RA";
    int max_samples = 0;
    int save_views = 1;
    int epi_row = -1;
    int epi_col = -1;
    SensorOpts sensor;
};

void write_epi_slices(const celf_lightfield* lf, const std::string& base, int row, int col) {
    int w = celf_lightfield_width(lf);
    int h = celf_lightfield_height(lf);
    int y = row >= 0 ? row : h / 2;
    int x = col >= 0 ? col : w / 2;
    if (y >= h || x >= w) die("EPI slice position outside the field");

    std::vector<double> epi_row(static_cast<size_t>(8) * w);
    for (int u = 0; u < 8; ++u) {
        for (int xx = 0; xx < w; ++xx) {
            double v = 0.0;
            ok(celf_lightfield_get(lf, xx, y, u, 4, &v));
            epi_row[static_cast<size_t>(u) * w + xx] = v;
        }
    }
    ok(celf_write_png_gray((base + "_epi_row.png").c_str(), epi_row.data(), w, 8, 16));

    std::vector<double> epi_col(static_cast<size_t>(h) * 8);
    for (int yy = 0; yy < h; ++yy) {
        for (int v = 0; v < 8; ++v) {
            double val = 0.0;
            ok(celf_lightfield_get(lf, x, yy, 4, v, &val));
            epi_col[static_cast<size_t>(yy) * 8 + v] = val;
        }
    }
    ok(celf_write_png_gray((base + "_epi_col.png").c_str(), epi_col.data(), 8, h, 16));
}

void run_eval(const EvalOpts& o) {
    if (o.net_path.empty() || o.patterns_path.empty()) die("--net and --patterns are required");
    std::string data = resolve_dir(o.data_dir, "--data");
    std::vector<LfPtr> dataset = load_dataset(data);
    if (o.max_samples > 0 && static_cast<size_t>(o.max_samples) < dataset.size())
        dataset.erase(dataset.begin() + o.max_samples, dataset.end());

    NetPtr net = wrap(celf_recnet_load(o.net_path.c_str()));
    PatPtr patterns = wrap(celf_patterns_load(o.patterns_path.c_str()));
    celf_train_mode mode = parse_mode(o.mode);
    celf_event_model model = mode_model(mode);
    int n = celf_patterns_count(patterns.get());
    if (celf_recnet_in_channels(net.get()) != n - 1)
        die("checkpoint expects N=" + std::to_string(celf_recnet_in_channels(net.get()) + 1) +
            " patterns, file has " + std::to_string(n));

    for (int i = 0; i < n; ++i) {
        double total = 0.0;
        ok(celf_patterns_total(patterns.get(), i, &total));
        std::printf("pattern %d: total transmittance %.4f%s\n", i + 1, total,
                    total == 0.0 ? " (all-zero black)" : "");
    }

    fs::create_directories(o.out_dir);
    json report;
    report["mode"] = o.mode;
    report["samples"] = json::array();
    double psnr_sum = 0.0, ssim_sum = 0.0, events_sum = 0.0;

    for (size_t i = 0; i < dataset.size(); ++i) {
        celf_sensor_config cfg = o.sensor.to_config();
        cfg.seed = o.sensor.seed + i;
        LfPtr recon = wrap(
            celf_reconstruct(dataset[i].get(), patterns.get(), net.get(), &cfg, model));
        EvPtr events = wrap(celf_acquire(dataset[i].get(), patterns.get(), &cfg, model));

        double psnr = 0.0, ssim = 0.0;
        ok(celf_psnr(dataset[i].get(), recon.get(), &psnr));
        ok(celf_lf_ssim(dataset[i].get(), recon.get(), &ssim));
        int w = 0, h = 0;
        ok(celf_events_dims(events.get(), &w, &h));
        double per_px = 0.0;
        for (int t = 0; t < celf_events_count(events.get()); ++t) {
            int64_t sum = 0;
            ok(celf_events_abs_sum(events.get(), t, &sum));
            per_px += static_cast<double>(sum) / (static_cast<double>(w) * h);
        }
        psnr_sum += psnr;
        ssim_sum += ssim;
        events_sum += per_px;

        json sample;
        sample["index"] = i;
        sample["psnr_db"] = psnr;
        sample["ssim"] = ssim;
        sample["events_per_pixel"] = per_px;
        report["samples"].push_back(sample);
        std::printf("sample %04zu: PSNR %.4f dB, SSIM %.4f, %.3f events/pixel\n", i, psnr, ssim,
                    per_px);

        if (static_cast<int>(i) < o.save_views) {
            std::string base = (fs::path(o.out_dir) / ("recon_" + zero_pad(static_cast<int>(i), 4)))
                                   .string();
            ok(celf_lightfield_save_dir(recon.get(), base.c_str(), 16));
            ok(celf_lightfield_save(recon.get(), (base + ".lf4").c_str()));
            write_epi_slices(recon.get(), base, o.epi_row, o.epi_col);
            std::string gt_base =
                (fs::path(o.out_dir) / ("truth_" + zero_pad(static_cast<int>(i), 4))).string();
            write_epi_slices(dataset[i].get(), gt_base, o.epi_row, o.epi_col);
        }
    }

    double count = static_cast<double>(dataset.size());
    double mean_events = events_sum / count;
    report["mean_psnr_db"] = psnr_sum / count;
    report["mean_ssim"] = ssim_sum / count;
    report["mean_events_per_pixel"] = mean_events;
    if (mean_events > 0.0) {
        double sensor_bpp = 0.0, lf_bpp = 0.0, ev_lf = 0.0;
        ok(celf_data_rate(mean_events, 29, &sensor_bpp, &lf_bpp, &ev_lf));
        report["sensor_bits_per_pixel"] = sensor_bpp;
        report["lf_bits_per_pixel"] = lf_bpp;
        report["events_per_lf_pixel"] = ev_lf;
    }
    std::printf("mean: PSNR %.4f dB, SSIM %.4f, %.3f events/pixel\n", psnr_sum / count,
                ssim_sum / count, mean_events);

    std::string report_path = (fs::path(o.out_dir) / "report.json").string();
    {
        std::string tmp = report_path + ".tmp";
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) die("cannot write " + tmp);
        out << report.dump(2) << "\n";
    }
    fs::rename(report_path + ".tmp", report_path);
    std::printf("wrote %s\n", report_path.c_str());
}

/* ---- info ---- */

void run_info() {
    std::printf("celf %s\n", celf_version());
    std::printf("light field: 8x8 views, monochrome, values in [0,1]\n");
    std::printf("formats: CELF-LF4 (light field), CELF-EI1 (event image),\n");
    std::printf("         CELF-EV1 (event stream), CELF-NN1 (network), CELF-AP1 (patterns)\n");
    std::printf("         PNG directory: view_{u}_{v}.png x 64 + meta.json\n");
    celf_sensor_config s;
    celf_sensor_config_default(&s);
    std::printf("sensor defaults: tau=%g epsilon=%g sigma_w=%g sigma_z=%g\n", s.tau, s.epsilon,
                s.sigma_w, s.sigma_z);
    celf_train_config t;
    celf_train_config_default(&t);
    std::printf("train defaults: N=%d epochs=%d batch=%d s_init=%g s_growth=%g lr=%g mode=baseline+BF+RA\n",
                t.n_patterns, t.epochs, t.batch_size, t.s_init, t.s_growth, t.lr);
    std::printf("data dir env: CELF_DATA_DIR%s\n",
                env_data_dir().empty() ? " (unset)" : (" = " + env_data_dir()).c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coded-aperture event-camera light-field toolkit"};
    app.require_subcommand(1);

    SimulateOpts sim;
    CLI::App* c_sim = app.add_subcommand("simulate", "simulate coded event acquisition");
    c_sim->add_option("--input", sim.input, "light field (.lf4 file or PNG directory)")
        ->required();
    c_sim->add_option("--patterns", sim.patterns_path, "CELF-AP1 pattern file");
    c_sim->add_option("--random-patterns", sim.random_patterns, "generate N random binary patterns");
    c_sim->add_flag("--black-first", sim.black_first, "force pattern 1 to black");
    c_sim->add_option("--save-patterns", sim.save_patterns, "persist the patterns used");
    c_sim->add_option("--out-dir", sim.out_dir, "output directory")->required();
    c_sim->add_option("--model", sim.model, "event model: baseline|ra");
    c_sim->add_option("--stream", sim.stream_path, "also write a CELF-EV1 stream");
    c_sim->add_option("--window-us", sim.window_us, "per-transition window for --stream");
    c_sim->add_option("--permute", sim.permute,
                      "noiseless permutation check, e.g. \"1,3,2,4\" (1-based)");
    add_sensor_flags(c_sim, sim.sensor);

    RecoverOpts rec;
    CLI::App* c_rec = app.add_subcommand("recover", "analytic recovery from event images");
    c_rec->add_option("--events", rec.event_paths, "event image files in transition order");
    c_rec->add_option("--events-dir", rec.events_dir, "directory of .ei1 files (sorted)");
    c_rec->add_option("--black-index", rec.black_index, "1-based index of the black pattern");
    c_rec->add_option("--out-dir", rec.out_dir, "output directory")->required();
    c_rec->add_option("--truth", rec.truth, "ground-truth light field for the residual report");
    c_rec->add_option("--patterns", rec.patterns_path, "patterns used during acquisition");
    add_sensor_flags(c_rec, rec.sensor);

    SynthOpts synth;
    CLI::App* c_synth = app.add_subcommand("make-synthetic", "generate synthetic light fields");
    c_synth->add_option("--out", synth.out_dir, "output directory (default: CELF_DATA_DIR)");
    c_synth->add_option("--count", synth.count, "number of samples");
    c_synth->add_option("--size", synth.size, "patch width and height");
    c_synth->add_option("--layers", synth.layers, "depth layers (disparities 0,2,4,...)");
    c_synth->add_option("--seed", synth.seed, "seed for all stochastic behavior");
    c_synth->add_flag("--png", synth.png, "also write PNG view directories");
    c_synth->add_option("--bit-depth", synth.bit_depth, "PNG bit depth (8 or 16)");

    TrainOpts tr;
    CLI::App* c_train = app.add_subcommand("train", "jointly optimize patterns and network");
    c_train->add_option("--data", tr.data_dir, "dataset directory of .lf4 files");
    c_train->add_option("--out-dir", tr.out_dir, "output directory");
    c_train->add_option("--config", tr.config_path, "key=value config file (flags win)");
    c_train->add_option("--n-patterns", tr.n_patterns, "patterns per sequence");
    c_train->add_option("--epochs", tr.epochs, "training epochs");
    c_train->add_option("--batch-size", tr.batch_size, "minibatch size");
    c_train->add_option("--mode", tr.mode,
                        "baseline|baseline+BF|baseline+RA|baseline+BF+RA");
    c_train->add_option("--s-init", tr.s_init, "initial sharpness");
    c_train->add_option("--s-growth", tr.s_growth, "sharpness growth per epoch");
    c_train->add_option("--lr", tr.lr, "Adam learning rate");
    c_train->add_option("--net-widths", tr.net_widths, "conv widths, e.g. \"32,32,64\"");
    c_train->add_flag("--quiet", tr.quiet, "suppress per-epoch lines");
    add_sensor_flags(c_train, tr.sensor);

    EvalOpts ev;
    CLI::App* c_eval = app.add_subcommand("eval", "evaluate a checkpoint on held-out fields");
    c_eval->add_option("--data", ev.data_dir, "dataset directory of .lf4 files");
    c_eval->add_option("--net", ev.net_path, "CELF-NN1 checkpoint")->required();
    c_eval->add_option("--patterns", ev.patterns_path, "CELF-AP1 pattern file")->required();
    c_eval->add_option("--out-dir", ev.out_dir, "output directory");
    c_eval->add_option("--mode", ev.mode, "acquisition mode used in training");
    c_eval->add_option("--max-samples", ev.max_samples, "limit the number of samples");
    c_eval->add_option("--save-views", ev.save_views, "samples to export as PNG views/EPIs");
    c_eval->add_option("--epi-row", ev.epi_row, "row for the horizontal EPI (default H/2)");
    c_eval->add_option("--epi-col", ev.epi_col, "column for the vertical EPI (default W/2)");
    add_sensor_flags(c_eval, ev.sensor);

    CLI::App* c_info = app.add_subcommand("info", "print version, formats, and defaults");

    // The config file seeds the defaults; explicit flags then override.
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            tr.config_path = argv[i + 1];
            apply_config_file(tr);
            break;
        }
    }

    CLI11_PARSE(app, argc, argv);

    if (c_sim->parsed()) run_simulate(sim);
    if (c_rec->parsed()) run_recover(rec);
    if (c_synth->parsed()) run_make_synthetic(synth);
    if (c_train->parsed()) run_train(tr);
    if (c_eval->parsed()) run_eval(ev);
    if (c_info->parsed()) run_info();
    return 0;
}
