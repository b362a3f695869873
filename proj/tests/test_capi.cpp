#include <doctest.h>

#include <unistd.h>

#include <celf/celf.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = fs::temp_directory_path() /
                (tag + "-" + std::to_string(::getpid()) + "-" +
                 std::to_string(reinterpret_cast<uintptr_t>(this)));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    fs::path path_;
};

celf_sensor_config quiet_cfg() {
    celf_sensor_config cfg;
    celf_sensor_config_default(&cfg);
    cfg.noiseless = 1;
    return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("capi");

TEST_CASE("version and default sensor configuration") {
    const char* v = celf_version();
    REQUIRE(v != nullptr);
    CHECK(std::strlen(v) > 0);

    celf_sensor_config cfg;
    celf_sensor_config_default(&cfg);
    CHECK(cfg.tau == 0.30);
    CHECK(cfg.epsilon == 0.01);
    CHECK(cfg.sigma_w == 0.175);
    CHECK(cfg.sigma_z == 0.04);
    CHECK(cfg.noiseless == 0);
}

TEST_CASE("light-field handles expose dimensions and elements") {
    celf_lightfield* lf = celf_lightfield_synth(1, 24, 20, 3);
    REQUIRE(lf != nullptr);
    CHECK(celf_lightfield_width(lf) == 24);
    CHECK(celf_lightfield_height(lf) == 20);

    double value = -1.0;
    CHECK(celf_lightfield_get(lf, 3, 2, 1, 5, &value) == CELF_OK);
    CHECK(value >= 0.0);
    CHECK(value <= 1.0);

    CHECK(celf_lightfield_set(lf, 3, 2, 1, 5, 0.625) == CELF_OK);
    CHECK(celf_lightfield_get(lf, 3, 2, 1, 5, &value) == CELF_OK);
    CHECK(value == 0.625);

    CHECK(celf_lightfield_get(lf, 24, 0, 0, 0, &value) == CELF_ERR_INVALID_ARGUMENT);
    CHECK(std::strlen(celf_last_error()) > 0);
    CHECK(celf_lightfield_get(lf, 0, 0, 8, 0, &value) == CELF_ERR_INVALID_ARGUMENT);
    CHECK(celf_lightfield_set(lf, 0, 0, 0, 0, 1.5) == CELF_ERR_INVALID_ARGUMENT);

    size_t n = static_cast<size_t>(24) * 20 * 64;
    std::vector<double> buffer(n);
    CHECK(celf_lightfield_read(lf, buffer.data(), n) == CELF_OK);
    CHECK(celf_lightfield_read(lf, buffer.data(), n - 1) == CELF_ERR_DIMENSION_MISMATCH);
    CHECK(buffer[0] >= 0.0);

    celf_lightfield* copy = celf_lightfield_create(24, 20);
    REQUIRE(copy != nullptr);
    CHECK(celf_lightfield_write(copy, buffer.data(), n) == CELF_OK);
    double v2 = -1.0;
    CHECK(celf_lightfield_get(copy, 3, 2, 1, 5, &v2) == CELF_OK);
    CHECK(v2 == 0.625);

    std::vector<double> view(static_cast<size_t>(24) * 20);
    CHECK(celf_lightfield_view(lf, 2, 3, view.data(), view.size()) == CELF_OK);
    double direct = -1.0;
    CHECK(celf_lightfield_get(lf, 5, 4, 2, 3, &direct) == CELF_OK);
    CHECK(view[static_cast<size_t>(4) * 24 + 5] == direct);

    CHECK(celf_lightfield_get(nullptr, 0, 0, 0, 0, &value) == CELF_ERR_INVALID_ARGUMENT);
    CHECK(celf_lightfield_width(nullptr) == 0);

    celf_lightfield_free(copy);
    celf_lightfield_free(lf);
    celf_lightfield_free(nullptr);
}

TEST_CASE("light-field files round-trip through the C surface") {
    TempDir td("celf-capi-lf");
    celf_lightfield* lf = celf_lightfield_synth(2, 12, 10, 2);
    REQUIRE(lf != nullptr);

    std::string path = td.file("x.lf4");
    CHECK(celf_lightfield_save(lf, path.c_str()) == CELF_OK);
    celf_lightfield* back = celf_lightfield_load(path.c_str());
    REQUIRE(back != nullptr);

    size_t n = static_cast<size_t>(12) * 10 * 64;
    std::vector<double> a(n), b(n);
    CHECK(celf_lightfield_read(lf, a.data(), n) == CELF_OK);
    CHECK(celf_lightfield_read(back, b.data(), n) == CELF_OK);
    for (size_t i = 0; i < n; ++i) {
        CHECK(std::abs(a[i] - b[i]) <= 1e-7);
    }

    CHECK(celf_lightfield_load(td.file("absent.lf4").c_str()) == nullptr);
    CHECK(std::strlen(celf_last_error()) > 0);

    celf_lightfield_free(back);
    celf_lightfield_free(lf);
}

TEST_CASE("pattern handles cover creation, access, and binarization") {
    celf_patterns* p = celf_patterns_random_binary(4, 7, 1);
    REQUIRE(p != nullptr);
    CHECK(celf_patterns_count(p) == 4);

    double grid[64];
    CHECK(celf_patterns_get(p, 0, grid) == CELF_OK);
    for (double v : grid) CHECK(v == 0.0);
    double total = -1.0;
    CHECK(celf_patterns_total(p, 0, &total) == CELF_OK);
    CHECK(total == 0.0);

    CHECK(celf_patterns_get(p, 1, grid) == CELF_OK);
    for (double v : grid) CHECK((v == 0.0 || v == 1.0));
    CHECK(celf_patterns_get(p, 4, grid) == CELF_ERR_INVALID_ARGUMENT);

    celf_patterns* soft = celf_patterns_create(2);
    REQUIRE(soft != nullptr);
    double half[64];
    for (double& v : half) v = 0.375;
    CHECK(celf_patterns_set(soft, 1, half) == CELF_OK);
    half[0] = 1.75;
    CHECK(celf_patterns_set(soft, 0, half) == CELF_ERR_INVALID_ARGUMENT);

    celf_patterns* hard = celf_patterns_binarize(soft);
    REQUIRE(hard != nullptr);
    CHECK(celf_patterns_get(hard, 1, grid) == CELF_OK);
    for (double v : grid) CHECK(v == 0.0);

    celf_patterns_free(hard);
    celf_patterns_free(soft);
    celf_patterns_free(p);
}

TEST_CASE("simulation, algebra, and recovery through the C surface") {
    TempDir td("celf-capi-sim");
    celf_lightfield* lf = celf_lightfield_synth(3, 16, 16, 3);
    celf_patterns* pats = celf_patterns_random_binary(4, 11, 1);
    REQUIRE(lf != nullptr);
    REQUIRE(pats != nullptr);
    celf_sensor_config cfg = quiet_cfg();

    celf_events* ev = celf_simulate(lf, pats, &cfg, CELF_MODEL_REFERENCE_AWARE);
    REQUIRE(ev != nullptr);
    CHECK(celf_events_count(ev) == 3);

    int w = 0, h = 0;
    CHECK(celf_events_dims(ev, &w, &h) == CELF_OK);
    CHECK(w == 16);
    CHECK(h == 16);

    int from = 0, to = 0;
    CHECK(celf_events_transition(ev, 0, &from, &to) == CELF_OK);
    CHECK(from == 1);
    CHECK(to == 2);

    int64_t total = 0;
    CHECK(celf_events_abs_sum(ev, 1, &total) == CELF_OK);
    CHECK(total > 0);

    std::vector<int32_t> raster(static_cast<size_t>(w) * h);
    CHECK(celf_events_get(ev, 0, raster.data(), raster.size()) == CELF_OK);
    CHECK(celf_events_get(ev, 3, raster.data(), raster.size()) == CELF_ERR_INVALID_ARGUMENT);

    double gap = 0.0;
    CHECK(celf_log_gap(2, &cfg, &gap) == CELF_OK);
    CHECK(gap == doctest::Approx(0.6).epsilon(1e-15));

    std::vector<int32_t> virt(static_cast<size_t>(w) * h);
    CHECK(celf_virtual_event(ev, 2, 4, virt.data(), virt.size()) == CELF_OK);
    std::vector<int32_t> e12(virt.size()), e23(virt.size()), e34(virt.size());
    CHECK(celf_events_get(ev, 1, e23.data(), e23.size()) == CELF_OK);
    CHECK(celf_events_get(ev, 2, e34.data(), e34.size()) == CELF_OK);
    for (size_t i = 0; i < virt.size(); ++i) CHECK(virt[i] == e23[i] + e34[i]);

    std::vector<std::string> names;
    std::vector<const char*> cnames;
    for (int i = 0; i < 3; ++i) {
        names.push_back(td.file("ev" + std::to_string(i) + ".ei1"));
        CHECK(celf_events_save(ev, i, names.back().c_str()) == CELF_OK);
    }
    for (const std::string& s : names) cnames.push_back(s.c_str());
    celf_events* loaded = celf_events_load(cnames.data(), 3);
    REQUIRE(loaded != nullptr);
    CHECK(celf_events_count(loaded) == 3);
    std::vector<int32_t> reread(raster.size());
    CHECK(celf_events_get(loaded, 0, reread.data(), reread.size()) == CELF_OK);
    CHECK(reread == raster);

    std::vector<double> recovered(static_cast<size_t>(4) * w * h);
    int64_t clamped = -1;
    CHECK(celf_recover(ev, 1, &cfg, recovered.data(), recovered.size(), &clamped) == CELF_OK);
    CHECK(clamped == 0);
    for (size_t i = 0; i < static_cast<size_t>(w) * h; ++i) CHECK(recovered[i] == 0.0);

    std::vector<double> coded(static_cast<size_t>(w) * h);
    for (int t = 1; t < 4; ++t) {
        CHECK(celf_code_image(lf, pats, t, 1, coded.data(), coded.size()) == CELF_OK);
        const double* rec = recovered.data() + static_cast<size_t>(t) * w * h;
        for (size_t i = 0; i < coded.size(); ++i) {
            double gaplog = std::log(rec[i] + cfg.epsilon) - std::log(coded[i] + cfg.epsilon);
            CHECK(std::abs(gaplog) < cfg.tau);
        }
    }

    int perm[4] = {1, 3, 4, 2};
    int64_t max_disc = -1;
    double frac = -1.0;
    CHECK(celf_permute_check(lf, pats, perm, &cfg, CELF_MODEL_REFERENCE_AWARE, &max_disc, &frac) ==
          CELF_OK);
    CHECK(max_disc >= 0);
    CHECK(frac >= 0.0);
    CHECK(frac <= 1.0);

    celf_events_free(loaded);
    celf_events_free(ev);
    celf_patterns_free(pats);
    celf_lightfield_free(lf);
}

TEST_CASE("streams expand and accumulate through the C surface") {
    TempDir td("celf-capi-stream");
    celf_lightfield* lf = celf_lightfield_synth(4, 8, 8, 2);
    celf_patterns* pats = celf_patterns_random_binary(3, 13, 1);
    celf_sensor_config cfg = quiet_cfg();

    celf_events* ev = celf_simulate(lf, pats, &cfg, CELF_MODEL_BASELINE);
    REQUIRE(ev != nullptr);
    REQUIRE(celf_events_count(ev) == 2);

    uint32_t durations[2] = {1000, 500};
    celf_stream* s = celf_stream_expand(ev, durations, 2);
    REQUIRE(s != nullptr);

    int64_t abs0 = 0, abs1 = 0;
    CHECK(celf_events_abs_sum(ev, 0, &abs0) == CELF_OK);
    CHECK(celf_events_abs_sum(ev, 1, &abs1) == CELF_OK);
    uint64_t count = 0;
    CHECK(celf_stream_count(s, &count) == CELF_OK);
    CHECK(count == static_cast<uint64_t>(abs0 + abs1));

    std::vector<int32_t> acc(64), img(64);
    CHECK(celf_stream_accumulate(s, 0, 1000, acc.data(), acc.size()) == CELF_OK);
    CHECK(celf_events_get(ev, 0, img.data(), img.size()) == CELF_OK);
    CHECK(acc == img);

    std::string path = td.file("s.ev1");
    CHECK(celf_stream_save(s, path.c_str()) == CELF_OK);
    celf_stream* back = celf_stream_load(path.c_str());
    REQUIRE(back != nullptr);
    uint64_t count2 = 0;
    CHECK(celf_stream_count(back, &count2) == CELF_OK);
    CHECK(count2 == count);

    celf_stream_free(back);
    celf_stream_free(s);
    celf_events_free(ev);
    celf_patterns_free(pats);
    celf_lightfield_free(lf);
}

TEST_CASE("metrics answers through the C surface") {
    celf_lightfield* a = celf_lightfield_synth(5, 14, 12, 2);
    REQUIRE(a != nullptr);

    double score = 0.0;
    CHECK(celf_psnr(a, a, &score) == CELF_OK);
    CHECK(std::isinf(score));
    CHECK(celf_lf_ssim(a, a, &score) == CELF_OK);
    CHECK(score == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<double> img(static_cast<size_t>(14) * 12, 0.5);
    CHECK(celf_ssim_image(img.data(), img.data(), 14, 12, &score) == CELF_OK);
    CHECK(score == 1.0);

    double sensor_bpp = 0.0, lf_bpp = 0.0, epx = 0.0;
    CHECK(celf_data_rate(7.175, 29, &sensor_bpp, &lf_bpp, &epx) == CELF_OK);
    CHECK(sensor_bpp == doctest::Approx(208.075).epsilon(1e-10));
    CHECK(lf_bpp == doctest::Approx(3.2512).epsilon(1e-4));
    CHECK(epx == doctest::Approx(0.112).epsilon(2e-3));
    CHECK(celf_data_rate(-1.0, 29, &sensor_bpp, &lf_bpp, &epx) == CELF_ERR_INVALID_ARGUMENT);

    celf_lightfield_free(a);
}

TEST_CASE("network handles and a tiny training run") {
    TempDir td("celf-capi-train");

    int widths[2] = {4, 64};
    celf_recnet* net = celf_recnet_create(3, widths, 2, 21);
    REQUIRE(net != nullptr);
    CHECK(celf_recnet_in_channels(net) == 3);
    CHECK(celf_recnet_layer_count(net) == 2);

    std::string npath = td.file("n.nn1");
    CHECK(celf_recnet_save(net, npath.c_str()) == CELF_OK);
    celf_recnet* nback = celf_recnet_load(npath.c_str());
    REQUIRE(nback != nullptr);
    CHECK(celf_recnet_in_channels(nback) == 3);
    CHECK(celf_recnet_load(td.file("absent.nn1").c_str()) == nullptr);

    std::vector<celf_lightfield*> samples;
    for (int i = 0; i < 12; ++i) {
        samples.push_back(celf_lightfield_synth(static_cast<uint64_t>(40 + i), 16, 16, 2));
        REQUIRE(samples.back() != nullptr);
    }

    celf_train_config cfg;
    celf_train_config_default(&cfg);
    cfg.n_patterns = 3;
    cfg.epochs = 1;
    cfg.batch_size = 4;
    cfg.mode = CELF_MODE_BASELINE_BF_RA;
    cfg.net_widths = widths;
    cfg.net_layer_count = 2;
    cfg.seed = 5;
    cfg.sensor.seed = 5;

    celf_train_result* res =
        celf_train(const_cast<const celf_lightfield* const*>(samples.data()), samples.size(), &cfg);
    REQUIRE(res != nullptr);
    CHECK(celf_train_result_epochs(res) == 1);

    double s = 0, train_loss = 0, val_loss = 0, events = 0, min_t = 0;
    CHECK(celf_train_result_epoch(res, 0, &s, &train_loss, &val_loss, &events, &min_t) == CELF_OK);
    CHECK(s == 1.0);
    CHECK(std::isfinite(train_loss));
    CHECK(train_loss > 0.0);
    CHECK(events > 0.0);
    CHECK(min_t == 0.0);
    CHECK(celf_train_result_final_s(res) == doctest::Approx(1.02).epsilon(1e-15));

    celf_patterns* learned = celf_train_result_patterns(res);
    REQUIRE(learned != nullptr);
    CHECK(celf_patterns_count(learned) == 3);
    double grid[64];
    CHECK(celf_patterns_get(learned, 0, grid) == CELF_OK);
    for (double v : grid) CHECK(v == 0.0);

    celf_recnet* trained = celf_train_result_recnet(res);
    REQUIRE(trained != nullptr);
    CHECK(celf_recnet_in_channels(trained) == 2);

    celf_sensor_config scfg = quiet_cfg();
    celf_lightfield* recon =
        celf_reconstruct(samples[0], learned, trained, &scfg, CELF_MODEL_REFERENCE_AWARE);
    REQUIRE(recon != nullptr);
    CHECK(celf_lightfield_width(recon) == 16);
    double value = -1.0;
    CHECK(celf_lightfield_get(recon, 3, 3, 2, 2, &value) == CELF_OK);
    CHECK(value >= 0.0);
    CHECK(value <= 1.0);

    double mse1 = 0.0, mse2 = 0.0;
    CHECK(celf_eval_mse(const_cast<const celf_lightfield* const*>(samples.data()), 2, learned,
                        trained, &scfg, CELF_MODEL_REFERENCE_AWARE, &mse1) == CELF_OK);
    CHECK(celf_eval_mse(const_cast<const celf_lightfield* const*>(samples.data()), 2, learned,
                        trained, &scfg, CELF_MODEL_REFERENCE_AWARE, &mse2) == CELF_OK);
    CHECK(mse1 == mse2);
    CHECK(mse1 > 0.0);

    celf_lightfield_free(recon);
    celf_recnet_free(trained);
    celf_patterns_free(learned);
    celf_train_result_free(res);
    for (celf_lightfield* lf : samples) celf_lightfield_free(lf);
    celf_recnet_free(nback);
    celf_recnet_free(net);
}

TEST_SUITE_END();
