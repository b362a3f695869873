#ifndef CELF_H
#define CELF_H

/* C interface to the coded-aperture event light-field library. Handles are
 * opaque; every fallible call either returns a status code or, for
 * constructors, NULL with the failure message available from
 * celf_last_error(). */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#ifndef CELF_API
#if defined(_WIN32)
#define CELF_API
#else
#define CELF_API __attribute__((visibility("default")))
#endif
#endif

typedef enum celf_status {
    CELF_OK = 0,
    CELF_ERR_INVALID_ARGUMENT = 1,
    CELF_ERR_DIMENSION_MISMATCH = 2,
    CELF_ERR_IO = 3,
    CELF_ERR_FORMAT = 4,
    CELF_ERR_STATE = 5,
    CELF_ERR_UNKNOWN = 6
} celf_status;

typedef enum celf_event_model {
    CELF_MODEL_BASELINE = 0,
    CELF_MODEL_REFERENCE_AWARE = 1
} celf_event_model;

typedef enum celf_train_mode {
    CELF_MODE_BASELINE = 0,
    CELF_MODE_BASELINE_BF = 1,
    CELF_MODE_BASELINE_RA = 2,
    CELF_MODE_BASELINE_BF_RA = 3
} celf_train_mode;

CELF_API const char* celf_version(void);

/* Message describing the most recent failure on this thread. */
CELF_API const char* celf_last_error(void);

typedef struct celf_lightfield celf_lightfield;
typedef struct celf_patterns celf_patterns;
typedef struct celf_events celf_events;
typedef struct celf_stream celf_stream;
typedef struct celf_recnet celf_recnet;
typedef struct celf_train_result celf_train_result;

typedef struct celf_sensor_config {
    double tau;
    double epsilon;
    double sigma_w;
    double sigma_z;
    uint64_t seed;
    int noiseless;
} celf_sensor_config;

CELF_API void celf_sensor_config_default(celf_sensor_config* cfg);

/* ---- light fields (8x8 views, values in [0,1]) ---- */

CELF_API celf_lightfield* celf_lightfield_create(int width, int height);
CELF_API celf_lightfield* celf_lightfield_synth(uint64_t seed, int width, int height, int layers);
CELF_API celf_lightfield* celf_lightfield_load(const char* path);
CELF_API celf_lightfield* celf_lightfield_load_dir(const char* dir);
CELF_API celf_lightfield* celf_lightfield_patch(const celf_lightfield* lf, int x0, int y0,
                                                int size);
CELF_API void celf_lightfield_free(celf_lightfield* lf);

CELF_API int celf_lightfield_width(const celf_lightfield* lf);
CELF_API int celf_lightfield_height(const celf_lightfield* lf);
CELF_API celf_status celf_lightfield_save(const celf_lightfield* lf, const char* path);
CELF_API celf_status celf_lightfield_save_dir(const celf_lightfield* lf, const char* dir,
                                              int bit_depth);
CELF_API celf_status celf_lightfield_get(const celf_lightfield* lf, int x, int y, int u, int v,
                                         double* out);
CELF_API celf_status celf_lightfield_set(celf_lightfield* lf, int x, int y, int u, int v,
                                         double value);
/* Canonical (y,x,v,u) row-major order; len must equal W*H*64. */
CELF_API celf_status celf_lightfield_read(const celf_lightfield* lf, double* buffer, size_t len);
CELF_API celf_status celf_lightfield_write(celf_lightfield* lf, const double* buffer, size_t len);
/* One view as a W*H (y,x) raster; len must equal W*H. */
CELF_API celf_status celf_lightfield_view(const celf_lightfield* lf, int u, int v, double* buffer,
                                          size_t len);

CELF_API celf_status celf_psnr(const celf_lightfield* ref, const celf_lightfield* est,
                               double* out);
CELF_API celf_status celf_lf_ssim(const celf_lightfield* ref, const celf_lightfield* est,
                                  double* out);

/* Coded image of pattern `index`; len must equal W*H. normalized divides by
 * the view count. */
CELF_API celf_status celf_code_image(const celf_lightfield* lf, const celf_patterns* patterns,
                                     int index, int normalized, double* buffer, size_t len);

/* Grayscale PNG of a [0,1] raster, bit depth 8 or 16; atomic write. */
CELF_API celf_status celf_write_png_gray(const char* path, const double* values, int width,
                                         int height, int bit_depth);

/* ---- aperture patterns (8x8, entry (u,v) at index v*8+u) ---- */

CELF_API celf_patterns* celf_patterns_create(int count);
CELF_API celf_patterns* celf_patterns_random_binary(int count, uint64_t seed, int black_first);
CELF_API celf_patterns* celf_patterns_load(const char* path);
CELF_API void celf_patterns_free(celf_patterns* p);

CELF_API int celf_patterns_count(const celf_patterns* p);
CELF_API celf_status celf_patterns_save(const celf_patterns* p, const char* path);
CELF_API celf_status celf_patterns_get(const celf_patterns* p, int index, double out[64]);
CELF_API celf_status celf_patterns_set(celf_patterns* p, int index, const double values[64]);
CELF_API celf_status celf_patterns_total(const celf_patterns* p, int index, double* out);
CELF_API celf_patterns* celf_patterns_binarize(const celf_patterns* p);

/* ---- event simulation ---- */

CELF_API celf_events* celf_simulate(const celf_lightfield* lf, const celf_patterns* patterns,
                                    const celf_sensor_config* cfg, celf_event_model model);
/* Acquisition as used by training and reconstruction; differs from
 * celf_simulate only in reference-aware mode without a black first pattern,
 * where the reference starts from the first coded image. */
CELF_API celf_events* celf_acquire(const celf_lightfield* lf, const celf_patterns* patterns,
                                   const celf_sensor_config* cfg, celf_event_model model);
CELF_API celf_events* celf_events_load(const char* const* paths, int count);
CELF_API void celf_events_free(celf_events* e);

CELF_API int celf_events_count(const celf_events* e);
CELF_API celf_status celf_events_dims(const celf_events* e, int* width, int* height);
CELF_API celf_status celf_events_get(const celf_events* e, int index, int32_t* buffer, size_t len);
CELF_API celf_status celf_events_transition(const celf_events* e, int index, int* from, int* to);
CELF_API celf_status celf_events_abs_sum(const celf_events* e, int index, int64_t* out);
CELF_API celf_status celf_events_save(const celf_events* e, int index, const char* path);

/* ---- event algebra ---- */

CELF_API celf_status celf_log_gap(int64_t event_sum, const celf_sensor_config* cfg, double* out);
/* Virtual event image between 1-based pattern indices; len must be W*H. */
CELF_API celf_status celf_virtual_event(const celf_events* e, int from, int to, int32_t* buffer,
                                        size_t len);
/* Recovers N normalized intensity images into buffer (N*W*H doubles). */
CELF_API celf_status celf_recover(const celf_events* e, int black_index,
                                  const celf_sensor_config* cfg, double* buffer, size_t len,
                                  int64_t* clamped_pixels);
/* perm holds 1-based original indices in presentation order, length = count. */
CELF_API celf_status celf_permute_check(const celf_lightfield* lf, const celf_patterns* patterns,
                                        const int* perm, const celf_sensor_config* cfg,
                                        celf_event_model model, int64_t* max_abs_discrepancy,
                                        double* frac_within_one);

/* ---- timestamped streams ---- */

CELF_API celf_stream* celf_stream_expand(const celf_events* e, const uint32_t* durations_us,
                                         int count);
CELF_API celf_stream* celf_stream_load(const char* path);
CELF_API void celf_stream_free(celf_stream* s);

CELF_API celf_status celf_stream_save(const celf_stream* s, const char* path);
CELF_API celf_status celf_stream_dims(const celf_stream* s, int* width, int* height);
CELF_API celf_status celf_stream_count(const celf_stream* s, uint64_t* out);
CELF_API celf_status celf_stream_accumulate(const celf_stream* s, uint32_t t0, uint32_t t1,
                                            int32_t* buffer, size_t len);

/* ---- reconstruction network ---- */

CELF_API celf_recnet* celf_recnet_create(int in_channels, const int* widths, int layer_count,
                                         uint64_t seed);
CELF_API celf_recnet* celf_recnet_load(const char* path);
CELF_API void celf_recnet_free(celf_recnet* net);

CELF_API celf_status celf_recnet_save(const celf_recnet* net, const char* path);
CELF_API int celf_recnet_in_channels(const celf_recnet* net);
CELF_API int celf_recnet_layer_count(const celf_recnet* net);

CELF_API celf_lightfield* celf_reconstruct(const celf_lightfield* lf,
                                           const celf_patterns* patterns, const celf_recnet* net,
                                           const celf_sensor_config* cfg, celf_event_model model);
CELF_API celf_status celf_eval_mse(const celf_lightfield* const* samples, size_t count,
                                   const celf_patterns* patterns, const celf_recnet* net,
                                   const celf_sensor_config* cfg, celf_event_model model,
                                   double* out);

/* ---- training ---- */

typedef struct celf_train_config {
    int n_patterns;
    int epochs;
    int batch_size;
    celf_train_mode mode;
    double s_init;
    double s_growth;
    double lr;
    celf_sensor_config sensor;
    uint64_t seed;
    const int* net_widths; /* NULL selects the default stack */
    int net_layer_count;
} celf_train_config;

CELF_API void celf_train_config_default(celf_train_config* cfg);

CELF_API celf_train_result* celf_train(const celf_lightfield* const* samples, size_t count,
                                       const celf_train_config* cfg);
CELF_API void celf_train_result_free(celf_train_result* r);

CELF_API int celf_train_result_epochs(const celf_train_result* r);
CELF_API celf_status celf_train_result_epoch(const celf_train_result* r, int index, double* s,
                                             double* train_loss, double* val_loss,
                                             double* events_per_pixel, double* min_transmittance);
CELF_API celf_patterns* celf_train_result_patterns(const celf_train_result* r);
CELF_API celf_recnet* celf_train_result_recnet(const celf_train_result* r);
CELF_API double celf_train_result_final_s(const celf_train_result* r);

/* ---- metrics ---- */

CELF_API celf_status celf_ssim_image(const double* ref, const double* est, int width, int height,
                                     double* out);
CELF_API celf_status celf_data_rate(double events_per_pixel, int bits_per_event,
                                    double* sensor_bits_per_pixel, double* lf_bits_per_pixel,
                                    double* events_per_lf_pixel);

#ifdef __cplusplus
}
#endif

#endif
