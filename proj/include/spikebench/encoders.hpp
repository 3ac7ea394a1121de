#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spikebench/rng.hpp"
#include "spikebench/tensor.hpp"

namespace spikebench {

enum class EncoderKind { kRate, kPoissonBurst, kDelayedBurst };

EncoderKind encoder_kind_from_name(const std::string& name);
std::string encoder_kind_name(EncoderKind kind);

// Configuration for the three input encoders. Rate uses only `timesteps`;
// the burst encoders add interval / burst-size / onset parameters.
struct EncoderSpec {
    EncoderKind kind = EncoderKind::kRate;
    int64_t timesteps = 100;
    int64_t interval = 10;    // poisson-burst: length of each trigger window
    double burst_mean = 3.0;  // mean spikes per burst (poisson)
    int64_t isi = 1;          // gap between consecutive spikes inside a burst
    int64_t margin = 10;      // delayed-burst: keeps expected onsets off the window end
    double clip_ratio = 0.2;  // delayed-burst: relative half-width of the onset clip

    void validate() const;  // throws ConfigError on out-of-range parameters
};

// Default spec for a given encoder kind. Burst encoders differ in their
// default burst size (3.0 for poisson-burst, 4.0 for delayed-burst).
EncoderSpec default_encoder_spec(EncoderKind kind, int64_t timesteps);

// One sample's worth of encoded input: binary tensor, time-major.
struct SpikeTrain {
    int64_t timesteps = 0;
    int64_t features = 0;
    Tensor bits;  // [timesteps, features], every entry 0.0 or 1.0
};

// Per-feature row encoders. They write feature activity at times t into
// row[t * stride] for t in [0, timesteps), clearing the row first. The
// optional stats out-params expose the raw draws for distribution tests.
void rate_row(double x, int64_t timesteps, RngStream& rng, float* row, int64_t stride = 1);

struct BurstRowStats {
    int64_t triggers = 0;                // intervals whose Bernoulli trial fired
    std::vector<int32_t> drawn_sizes;    // Poisson draw per triggered interval
};
void poisson_burst_row(double x, const EncoderSpec& spec, RngStream& rng, float* row,
                       int64_t stride = 1, BurstRowStats* stats = nullptr);

struct DelayStats {
    double expected = 0.0;   // (1 - x) * (timesteps - margin)
    int64_t sampled = 0;     // geometric draw before clipping
    int64_t onset = 0;       // delay actually used after clipping
    int32_t drawn_size = 0;  // Poisson draw for the burst
};
void delayed_burst_row(double x, const EncoderSpec& spec, RngStream& rng, float* row,
                       int64_t stride = 1, DelayStats* stats = nullptr);

// Encode one sample (any layout; features are flattened in row-major order).
SpikeTrain encode_sample(const float* x, int64_t features, const EncoderSpec& spec,
                         RngStream& rng);
SpikeTrain encode_sample(const std::vector<float>& x, const EncoderSpec& spec, RngStream& rng);

// Encode a batch X[B, features...] into [T, B, features]. Each sample uses a
// stream derived from `base` by its id (its row index when `sample_ids` is
// null), so encodings depend only on sample identity, not batch composition.
Tensor encode_batch(const Tensor& X, const EncoderSpec& spec, const RngStream& base,
                    const int64_t* sample_ids = nullptr);

// Preview helpers for the encode subcommand: a text raster (one line per
// feature, '|' marks a spike) and a CSV of (t, feature) spike coordinates.
std::string raster_text(const SpikeTrain& train);
std::string spike_csv(const SpikeTrain& train);

}  // namespace spikebench
