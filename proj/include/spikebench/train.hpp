#pragma once

#include <cstdint>
#include <vector>

#include "spikebench/datasets.hpp"
#include "spikebench/encoders.hpp"
#include "spikebench/model.hpp"

namespace spikebench {

struct TrainConfig {
    size_t epochs = 50;
    size_t batch_size = 128;
    float lr = 0.001f;
    uint64_t seed = 42;
    bool verbose = false;  // one progress line per epoch on stderr
};

struct TrainResult {
    std::vector<float> epoch_loss;  // mean per-sample loss per epoch
};

// Encode one dataset row with the stream derived from its row id. The draw
// depends only on (base, row), never on batch composition or visit order.
SpikeTrain encode_row(const DatasetSplit& ds, size_t row, const EncoderSpec& spec,
                      const RngStream& encoder_base);

// Model sized for the dataset, weights drawn from the weight-init stream.
SnnModel make_model_for(const DatasetSplit& ds, ArchKind arch, const LifParams& lif,
                        size_t hidden, uint64_t seed);

// Mini-batch Adam over the given rows. Batches re-shuffle each epoch from
// the batch-shuffle stream; gradients average over the batch. Spike trains
// are redrawn per epoch from an epoch-derived encoder stream; evaluation
// encodes from the underived stream, so eval draws never appear in training.
TrainResult train_model(SnnModel& model, const DatasetSplit& ds, const std::vector<size_t>& rows,
                        const EncoderSpec& spec, const TrainConfig& cfg);

float evaluate_accuracy(const SnnModel& model, const DatasetSplit& ds,
                        const std::vector<size_t>& rows, const EncoderSpec& spec, uint64_t seed);

// Final-timestep output membranes per row, [rows.size(), classes].
Tensor collect_attack_features(const SnnModel& model, const DatasetSplit& ds,
                               const std::vector<size_t>& rows, const EncoderSpec& spec,
                               uint64_t seed);

}  // namespace spikebench
