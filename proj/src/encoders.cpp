#include "spikebench/encoders.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "spikebench/errors.hpp"

namespace spikebench {

EncoderKind encoder_kind_from_name(const std::string& name) {
    if (name == "rate") return EncoderKind::kRate;
    if (name == "poisson-burst") return EncoderKind::kPoissonBurst;
    if (name == "delayed-burst") return EncoderKind::kDelayedBurst;
    throw ConfigError("unknown encoder '" + name +
                      "' (expected rate, poisson-burst, or delayed-burst)");
}

std::string encoder_kind_name(EncoderKind kind) {
    switch (kind) {
        case EncoderKind::kRate: return "rate";
        case EncoderKind::kPoissonBurst: return "poisson-burst";
        case EncoderKind::kDelayedBurst: return "delayed-burst";
    }
    throw ConfigError("invalid encoder kind");
}

void EncoderSpec::validate() const {
    if (timesteps < 1) throw ConfigError("encoder timesteps must be >= 1");
    if (kind == EncoderKind::kRate) return;
    if (burst_mean <= 0.0) throw ConfigError("encoder burst_mean must be > 0");
    if (isi < 1) throw ConfigError("encoder isi must be >= 1");
    if (kind == EncoderKind::kPoissonBurst) {
        if (interval < 1) throw ConfigError("poisson-burst interval must be >= 1");
        if (timesteps % interval != 0)
            throw ConfigError("poisson-burst requires timesteps divisible by interval (" +
                              std::to_string(timesteps) + " % " + std::to_string(interval) +
                              " != 0)");
    } else {
        if (clip_ratio < 0.0 || clip_ratio > 1.0)
            throw ConfigError("delayed-burst clip_ratio must lie in [0,1]");
        if (margin < 0 || margin >= timesteps)
            throw ConfigError("delayed-burst margin must lie in [0, timesteps)");
    }
}

EncoderSpec default_encoder_spec(EncoderKind kind, int64_t timesteps) {
    EncoderSpec spec;
    spec.kind = kind;
    spec.timesteps = timesteps;
    if (kind == EncoderKind::kDelayedBurst) spec.burst_mean = 4.0;
    return spec;
}

namespace {

void check_input_range(double x) {
    if (!(x >= 0.0 && x <= 1.0))
        throw std::domain_error("encoder input " + std::to_string(x) +
                                " outside [0,1]; normalize inputs before encoding");
}

void clear_row(float* row, int64_t timesteps, int64_t stride) {
    for (int64_t t = 0; t < timesteps; ++t) row[t * stride] = 0.0f;
}

}  // namespace

void rate_row(double x, int64_t timesteps, RngStream& rng, float* row, int64_t stride) {
    check_input_range(x);
    for (int64_t t = 0; t < timesteps; ++t)
        row[t * stride] = rng.sample_bernoulli(x) ? 1.0f : 0.0f;
}

void poisson_burst_row(double x, const EncoderSpec& spec, RngStream& rng, float* row,
                       int64_t stride, BurstRowStats* stats) {
    check_input_range(x);
    clear_row(row, spec.timesteps, stride);
    const int64_t n_intervals = spec.timesteps / spec.interval;
    for (int64_t k = 0; k < n_intervals; ++k) {
        if (!rng.sample_bernoulli(x)) continue;
        const long n = rng.sample_poisson(spec.burst_mean);
        if (stats) {
            ++stats->triggers;
            stats->drawn_sizes.push_back(static_cast<int32_t>(n));
        }
        const int64_t start = k * spec.interval;
        const int64_t end = start + spec.interval;  // spikes never cross the interval edge
        for (long j = 0; j < n; ++j) {
            const int64_t t = start + j * spec.isi;
            if (t >= end) break;
            row[t * stride] = 1.0f;
        }
    }
}

void delayed_burst_row(double x, const EncoderSpec& spec, RngStream& rng, float* row,
                       int64_t stride, DelayStats* stats) {
    check_input_range(x);
    clear_row(row, spec.timesteps, stride);

    // stronger input -> shorter expected onset delay
    const double expected =
        (1.0 - x) * static_cast<double>(spec.timesteps - spec.margin);
    const long sampled = rng.sample_geometric(expected);

    // clip the onset into a band around its expectation, then into the window;
    // the lower bound is applied first, so a degenerate band (hi < lo, possible
    // for tiny expectations) resolves to its upper edge
    const auto lo = static_cast<int64_t>(std::ceil((1.0 - spec.clip_ratio) * expected));
    const auto hi = static_cast<int64_t>(std::floor((1.0 + spec.clip_ratio) * expected));
    int64_t onset = sampled;
    if (onset < lo) onset = lo;
    if (onset > hi) onset = hi;
    if (onset < 0) onset = 0;
    if (onset > spec.timesteps - 1) onset = spec.timesteps - 1;

    const long n = rng.sample_poisson(spec.burst_mean);
    if (stats) {
        stats->expected = expected;
        stats->sampled = sampled;
        stats->onset = onset;
        stats->drawn_size = static_cast<int32_t>(n);
    }
    for (long j = 0; j < n; ++j) {
        const int64_t t = onset + j * spec.isi;
        if (t >= spec.timesteps) break;  // drop spikes past the window, no wrap
        row[t * stride] = 1.0f;
    }
}

SpikeTrain encode_sample(const float* x, int64_t features, const EncoderSpec& spec,
                         RngStream& rng) {
    spec.validate();
    SpikeTrain train;
    train.timesteps = spec.timesteps;
    train.features = features;
    train.bits = Tensor({static_cast<size_t>(spec.timesteps), static_cast<size_t>(features)});
    float* base = train.bits.data.data();
    for (int64_t i = 0; i < features; ++i) {
        float* row = base + i;  // feature i occupies a stride-`features` column
        switch (spec.kind) {
            case EncoderKind::kRate:
                rate_row(x[i], spec.timesteps, rng, row, features);
                break;
            case EncoderKind::kPoissonBurst:
                poisson_burst_row(x[i], spec, rng, row, features);
                break;
            case EncoderKind::kDelayedBurst:
                delayed_burst_row(x[i], spec, rng, row, features);
                break;
        }
    }
    return train;
}

SpikeTrain encode_sample(const std::vector<float>& x, const EncoderSpec& spec, RngStream& rng) {
    return encode_sample(x.data(), static_cast<int64_t>(x.size()), spec, rng);
}

Tensor encode_batch(const Tensor& X, const EncoderSpec& spec, const RngStream& base,
                    const int64_t* sample_ids) {
    spec.validate();
    if (X.shape.size() < 2)
        throw ShapeError("encode_batch expects X[B, features...], got " + X.shape_str());
    const auto batch = static_cast<int64_t>(X.shape[0]);
    const auto features = static_cast<int64_t>(X.numel()) / batch;
    Tensor out({static_cast<size_t>(spec.timesteps), static_cast<size_t>(batch),
                static_cast<size_t>(features)});
    for (int64_t b = 0; b < batch; ++b) {
        const int64_t id = sample_ids ? sample_ids[b] : b;
        RngStream rng = base.derive(static_cast<uint64_t>(id));
        SpikeTrain train = encode_sample(X.ptr() + b * features, features, spec, rng);
        for (int64_t t = 0; t < spec.timesteps; ++t) {
            const float* src = train.bits.ptr() + t * features;
            float* dst = out.data.data() + (t * batch + b) * features;
            for (int64_t i = 0; i < features; ++i) dst[i] = src[i];
        }
    }
    return out;
}

std::string raster_text(const SpikeTrain& train) {
    std::string out;
    out.reserve(static_cast<size_t>(train.features * (train.timesteps + 1)));
    for (int64_t i = 0; i < train.features; ++i) {
        for (int64_t t = 0; t < train.timesteps; ++t)
            out += train.bits.ptr()[t * train.features + i] != 0.0f ? '|' : '.';
        out += '\n';
    }
    return out;
}

std::string spike_csv(const SpikeTrain& train) {
    std::ostringstream out;
    out << "t,feature\n";
    for (int64_t t = 0; t < train.timesteps; ++t)
        for (int64_t i = 0; i < train.features; ++i)
            if (train.bits.ptr()[t * train.features + i] != 0.0f)
                out << t << ',' << i << '\n';
    return out.str();
}

}  // namespace spikebench
