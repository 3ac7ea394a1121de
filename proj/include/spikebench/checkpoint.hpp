#pragma once

#include <cstdint>
#include <string>

#include "spikebench/encoders.hpp"
#include "spikebench/model.hpp"

namespace spikebench {

// Model snapshot: 8-byte magic, little-endian u32 header length, JSON
// header (arch, sizes, LIF and encoder parameters, tensor manifest), then
// the raw float32 tensors in canonical parameter order. Round-trips are
// bit-exact.
inline constexpr char kCheckpointMagic[8] = {'S', 'P', 'K', 'B', 'N', 'E', 'T', '1'};

void save_checkpoint(const std::string& path, SnnModel& model, const EncoderSpec& spec,
                     uint64_t seed);

struct Checkpoint {
    SnnModel model;
    EncoderSpec spec;
    uint64_t seed = 0;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace spikebench
