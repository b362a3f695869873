#ifndef CELF_CORE_TRAINER_HPP
#define CELF_CORE_TRAINER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "core/adam.hpp"
#include "core/event_sim.hpp"
#include "core/lightfield.hpp"
#include "core/recnet.hpp"
#include "core/tensor.hpp"

namespace celf {

enum class TrainMode { Baseline, BaselineBF, BaselineRA, BaselineBFRA };

TrainMode parse_train_mode(const std::string& name);
std::string to_string(TrainMode mode);
bool mode_black_first(TrainMode mode);
EventModel mode_event_model(TrainMode mode);

// Unconstrained pattern parameters; grid n is realized as sigmoid(s * grid)
// unless frozen_black, which pins it to the zero pattern.
struct PatternLogits {
    int count = 0;
    std::vector<double> values;   // count * 64, entry (u,v) of grid n at n*64 + v*8 + u
    std::vector<uint8_t> frozen;  // frozen_black flags

    static PatternLogits random(int n, uint64_t seed, bool black_first);

    double* grid(int n) { return values.data() + static_cast<size_t>(n) * 64; }
    const double* grid(int n) const { return values.data() + static_cast<size_t>(n) * 64; }
    bool frozen_black(int n) const { return frozen[static_cast<size_t>(n)] != 0; }
};

std::vector<AperturePattern> patterns_from_logits(const PatternLogits& logits, double s);

// Threshold at 0.5 (ties go to 1) and mark the result binary.
std::vector<AperturePattern> binarize_patterns(const std::vector<AperturePattern>& patterns);

struct TrainConfig {
    int n_patterns = 4;
    int epochs = 600;
    int batch_size = 16;
    TrainMode mode = TrainMode::BaselineBFRA;
    double s_init = 1.0;
    double s_growth = 1.02;
    SensorConfig sensor;
    AdamConfig adam;
    std::vector<int> net_widths = ReconNet::default_widths();
    uint64_t seed = 0;

    void validate() const;
};

struct EpochStats {
    int epoch = 0;      // 1-based
    double s = 0.0;     // sharpness used during this epoch
    double train_loss = 0.0;
    double val_loss = 0.0;  // NaN when the dataset is too small for a split
    double mean_events_per_pixel = 0.0;
    double min_transmittance = 0.0;
};

struct TrainResult {
    PatternLogits logits;
    ReconNet net;
    std::vector<AperturePattern> patterns;  // realized at the final s
    std::vector<EpochStats> history;
    double final_s = 0.0;
};

// Joint minibatch Adam over pattern logits and network weights. Validation
// uses the last tenth of the sample list; everything is deterministic given
// the config seeds.
TrainResult train(const std::vector<LightField>& dataset, const TrainConfig& cfg);

// The training-time acquisition: coded images, normalization, noisy event
// generation. Reference-aware mode initializes the reference from the first
// coded image, so a black first pattern reproduces the black-start sensor.
Tensor acquire_events(const LightField& lf, const std::vector<AperturePattern>& patterns,
                      const SensorConfig& sensor, EventModel model);

// Same acquisition as integer event images with transition labels.
std::vector<EventImage> acquire_event_images(const LightField& lf,
                                             const std::vector<AperturePattern>& patterns,
                                             const SensorConfig& sensor, EventModel model);

// The acquisition with the quantizer replaced by the identity; this is the
// exact function whose gradient the straight-through backward computes.
Tensor acquire_events_unquantized(const LightField& lf,
                                  const std::vector<AperturePattern>& patterns,
                                  const SensorConfig& sensor, EventModel model);

// Accumulates dLoss/d(pattern entry) into d_pattern (n x 64, a-domain) given
// dLoss/dE for the event tensor of acquire_events on the same inputs.
void acquire_pattern_grad(const LightField& lf, const std::vector<AperturePattern>& patterns,
                          const SensorConfig& sensor, EventModel model, const Tensor& grad_events,
                          double* d_pattern);

Tensor lf_to_tensor(const LightField& lf);
LightField tensor_to_lf(const Tensor& t);  // clamps into [0,1]

LightField reconstruct(const LightField& lf, const std::vector<AperturePattern>& patterns,
                       const ReconNet& net, const SensorConfig& sensor, EventModel model);

// Mean MSE over samples; sample i uses a noise substream derived from
// (sensor.seed, i) so repeated calls are comparable.
double eval_mse(const std::vector<LightField>& samples,
                const std::vector<AperturePattern>& patterns, const ReconNet& net,
                const SensorConfig& sensor, EventModel model);

}  // namespace celf

#endif
