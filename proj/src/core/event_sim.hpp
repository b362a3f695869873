#ifndef CELF_CORE_EVENT_SIM_HPP
#define CELF_CORE_EVENT_SIM_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "core/lightfield.hpp"

namespace celf {

// Event sensor model parameters. tau is the contrast threshold in
// log-intensity units, epsilon the dark bias added inside every log.
struct SensorConfig {
    double tau = 0.30;
    double epsilon = 0.01;
    double sigma_w = 0.175;  // additive log-noise std
    double sigma_z = 0.04;   // threshold-noise std
    uint64_t seed = 0;
    bool noiseless = false;

    void validate() const;
};

// Signed per-pixel event counts for one pattern transition (from,to).
class EventImage {
public:
    EventImage(int width, int height, int from = 0, int to = 0);

    int width() const { return width_; }
    int height() const { return height_; }
    int from() const { return from_; }
    int to() const { return to_; }
    void set_transition(int from, int to) { from_ = from; to_ = to; }

    int32_t at(int x, int y) const { return values_[static_cast<size_t>(y) * width_ + x]; }
    void set(int x, int y, int32_t v) { values_[static_cast<size_t>(y) * width_ + x] = v; }

    const std::vector<int32_t>& values() const { return values_; }
    std::vector<int32_t>& values() { return values_; }

    int64_t abs_sum() const;

private:
    int width_ = 0;
    int height_ = 0;
    int from_ = 0;
    int to_ = 0;
    std::vector<int32_t> values_;
};

struct EventRecord {
    uint16_t x = 0;
    uint16_t y = 0;
    uint32_t t = 0;  // microseconds
    int8_t polarity = 0;
};

// Timestamped raw events, sorted by t with ties broken by (y,x).
class EventStream {
public:
    EventStream(int width, int height);
    static EventStream from_records(int width, int height, std::vector<EventRecord> records);

    int width() const { return width_; }
    int height() const { return height_; }
    const std::vector<EventRecord>& records() const { return records_; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<EventRecord> records_;
};

// Per-pixel stored log reference ln(I_ref + epsilon).
class RefState {
public:
    RefState(int width, int height, double initial_logref);
    static RefState black(int width, int height, double epsilon);

    int width() const { return width_; }
    int height() const { return height_; }

    double at(int x, int y) const { return logref_[static_cast<size_t>(y) * width_ + x]; }
    const std::vector<double>& logref() const { return logref_; }
    std::vector<double>& logref() { return logref_; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> logref_;
};

enum class EventModel { Baseline, ReferenceAware };

// Q(x) = sign(x) * floor(|x|); rejects non-finite input.
int64_t quantize(double x);

// Straight-through quantizer: the forward value is quantize(x), the
// backward pass hands the upstream gradient through unchanged.
double ste_quantize(double x);
double ste_quantize_backward(double upstream);

// Per-pixel sensor noise draw keyed by (seed, transition, y, x). z is
// resampled while tau + z <= 1e-6.
std::pair<double, double> sample_noise(const SensorConfig& cfg, int transition, int x, int y);

// E = Q((ln(curr+eps) - ln(prev+eps) + w) / (tau + z)); both inputs normalized.
EventImage gen_events_baseline(const CodedImage& prev, const CodedImage& curr,
                               const SensorConfig& cfg, int transition = 1);

// Reference-aware update: E = Q((ln(curr+eps) - logref + w) / (tau + z)),
// then logref += tau * E. Returns the event image and the updated state.
std::pair<EventImage, RefState> gen_events_ra(const CodedImage& curr, const RefState& ref,
                                              const SensorConfig& cfg, int transition = 1);

// Full acquisition chain: coded images, normalization, then N-1 event images
// under the selected model. Reference-aware mode threads the state starting
// from the black-initialized reference; the sensor settles on the first
// frame noiselessly and that response is not part of the output.
std::vector<EventImage> simulate_sequence(const LightField& lf,
                                          const std::vector<AperturePattern>& patterns,
                                          const SensorConfig& cfg, EventModel mode);

// Per-pixel polarity sum of records with t in [t0, t1).
EventImage accumulate_stream(const EventStream& stream, uint32_t t0, uint32_t t1);

// Synthesizes timestamps for a stack of event images over consecutive
// windows of the given durations; inverse of accumulate_stream over each
// window.
EventStream expand_to_stream(const std::vector<EventImage>& images,
                             const std::vector<uint32_t>& durations_us);

}  // namespace celf

#endif
