#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace spikebench {

// Seeded pseudo-random stream with explicit sub-stream derivation.
//
// A stream is identified by (seed, stream_id). The same pair always yields
// the same sample sequence; distinct stream_ids give statistically
// independent sequences. Internally an xoshiro256** generator seeded via a
// splitmix64 chain over both identifiers. Integer output is bit-exact
// across platforms.
//
// Conventional stream ids used throughout the project:
//   1 = encoder, 2 = weight-init, 3 = batch-shuffle, 4 = attack-split.
class RngStream {
public:
    RngStream(uint64_t seed, uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
        uint64_t x = seed ^ 0x9E3779B97F4A7C15ULL;
        x = splitmix(x) ^ mix_key(stream_id);
        for (auto& word : state_) {
            x = splitmix(x);
            word = x;
        }
        // xoshiro must not start from the all-zero state
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[3] = 1;
    }

    // Child stream, independent of the parent and of siblings with other keys.
    // Used to give each (consumer, epoch, sample) its own schedule.
    RngStream derive(uint64_t key) const { return RngStream(seed_, mix_key(stream_id_ * 0x100000001B3ULL + key)); }
    RngStream derive(uint64_t a, uint64_t b) const { return derive(mix_key(a) + b); }

    uint64_t seed() const { return seed_; }
    uint64_t stream_id() const { return stream_id_; }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0,1), 53 significant bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [0,1), 24 significant bits.
    float next_float() { return static_cast<float>(next_u64() >> 40) * 0x1.0p-24f; }

    float uniform(float lo, float hi) { return lo + (hi - lo) * next_float(); }

    // Unbiased integer in [0, n) via rejection.
    uint64_t next_below(uint64_t n) {
        if (n == 0) throw std::domain_error("next_below: n must be positive");
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    // One Bernoulli(p) trial; consumes exactly one uniform draw.
    int sample_bernoulli(double p) {
        if (p < 0.0 || p > 1.0) throw std::domain_error("sample_bernoulli: p outside [0,1]");
        return next_double() < p ? 1 : 0;
    }

    // Poisson(lambda) count by Knuth multiplication. lambda is capped at 100
    // (the multiplication loop degrades beyond that, and nothing here needs it).
    long sample_poisson(double lambda) {
        if (lambda < 0.0) throw std::domain_error("sample_poisson: lambda must be >= 0");
        if (lambda > 100.0) throw std::domain_error("sample_poisson: lambda above supported cap of 100");
        if (lambda == 0.0) return 0;
        const double limit = std::exp(-lambda);
        long k = 0;
        double prod = 1.0;
        do {
            ++k;
            prod *= next_double();
        } while (prod > limit);
        return k - 1;
    }

    // Geometric number of failures before the first success, support k >= 0,
    // P(k) = (1-p)^k * p with p = 1/(1+expected), so the mean is `expected`.
    long sample_geometric(double expected) {
        if (expected < 0.0) throw std::domain_error("sample_geometric: expected must be >= 0");
        if (expected == 0.0) return 0;
        const double p = 1.0 / (1.0 + expected);
        const double u = next_double();
        return static_cast<long>(std::floor(std::log1p(-u) / std::log1p(-p)));
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static uint64_t splitmix(uint64_t& x) {
        x += 0x9E3779B97F4A7C15ULL;
        uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    static uint64_t mix_key(uint64_t k) {
        uint64_t x = k;
        return splitmix(x);
    }

    uint64_t seed_;
    uint64_t stream_id_;
    uint64_t state_[4];
};

inline constexpr uint64_t kStreamEncoder = 1;
inline constexpr uint64_t kStreamWeightInit = 2;
inline constexpr uint64_t kStreamBatchShuffle = 3;
inline constexpr uint64_t kStreamAttackSplit = 4;

}  // namespace spikebench
