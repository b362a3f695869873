#ifndef CELF_CORE_METRICS_HPP
#define CELF_CORE_METRICS_HPP

#include <vector>

#include "core/event_sim.hpp"
#include "core/lightfield.hpp"

namespace celf {

// 10*log10(1/MSE) over all 4-D elements; +infinity when the fields match.
double psnr(const LightField& ref, const LightField& est);

// Mean local SSIM of two 2-D images, Gaussian window 11 (sigma 1.5),
// k1=0.01, k2=0.03, dynamic range 1, windows fully inside the frame.
double ssim(const std::vector<double>& ref, const std::vector<double>& est, int width, int height);

// Mean SSIM over the 64 views.
double lf_ssim(const LightField& ref, const LightField& est);

struct EventStats {
    std::vector<double> per_transition;  // mean |E| per pixel, one entry per image
    double total = 0.0;                  // sum of the per-transition means
};

EventStats event_stats(const std::vector<EventImage>& images);

struct DataRate {
    double sensor_bits_per_pixel = 0.0;
    double lf_bits_per_pixel = 0.0;
    double events_per_lf_pixel = 0.0;
};

// COO event cost: bits/pixel at the sensor and per light-field pixel.
DataRate data_rate(double events_per_pixel, int bits_per_event = 29);

}  // namespace celf

#endif
