#ifndef CELF_CORE_EVENT_ALGEBRA_HPP
#define CELF_CORE_EVENT_ALGEBRA_HPP

#include <cstdint>
#include <vector>

#include "core/event_sim.hpp"
#include "core/lightfield.hpp"

namespace celf {

// Predicted log-intensity gap ln(I'' + eps) - ln(I' + eps) for a summed
// event count.
double log_gap(int64_t event_sum, const SensorConfig& cfg);

// Virtual event image between pattern indices from and to (1-based over
// patterns 1..N); images hold the N-1 consecutive transitions.
EventImage virtual_event(const std::vector<EventImage>& images, int from, int to);

struct RecoveredIntensities {
    std::vector<CodedImage> images;  // N normalized images, entry black_index - 1 is zero
    int64_t clamped_pixels = 0;      // recoveries forced back into [0, 1]
};

// Analytic intensity recovery given that pattern black_index was all-black.
RecoveredIntensities recover_intensities(const std::vector<EventImage>& images, int black_index,
                                         const SensorConfig& cfg);

struct PermuteReport {
    int64_t max_abs_discrepancy = 0;
    double frac_within_one = 1.0;
    int64_t pixels_compared = 0;
};

// Simulates the original and permuted pattern orders noiselessly, predicts
// the permuted event images via virtual_event, and measures the per-pixel
// disagreement. perm lists 1-based original indices in presentation order.
PermuteReport permute_check(const LightField& lf, const std::vector<AperturePattern>& patterns,
                            const std::vector<int>& perm, const SensorConfig& cfg,
                            EventModel mode = EventModel::ReferenceAware);

}  // namespace celf

#endif
