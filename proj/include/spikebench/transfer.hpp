#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spikebench/datasets.hpp"
#include "spikebench/encoders.hpp"
#include "spikebench/model.hpp"
#include "spikebench/train.hpp"

namespace spikebench {

// Two-phase recipe: train the conv net on a source dataset, freeze the
// listed layers, retrain the rest on a target dataset. One encoder spec
// serves both phases by construction.
struct TransferPlan {
    std::string source;
    std::string target;
    std::vector<size_t> frozen_layers{0, 1};  // forward order: conv1, conv2, fc1, fc2
    size_t finetune_epochs = 50;
    EncoderSpec encoder;
};

// Trains a fresh conv net on the source rows. Zero epochs returns the
// initialized model untouched, so a saved checkpoint equals initialization.
SnnModel pretrain_convnet(const DatasetSplit& source, const std::vector<size_t>& rows,
                          const EncoderSpec& spec, const TrainConfig& cfg,
                          size_t hidden = 1000, const LifParams& lif = LifParams{});

// Copies the pretrained net, freezes the layers named in the plan, gives the
// output head fresh weights unless it is frozen (rebuilding it when the
// target class count differs), and retrains on the target rows. Frozen
// tensors come back bit-identical; training itself rechecks that per epoch.
SnnModel finetune(const SnnModel& pretrained, const DatasetSplit& target,
                  const std::vector<size_t>& rows, const EncoderSpec& spec,
                  const std::vector<size_t>& frozen_layers, const TrainConfig& cfg);

}  // namespace spikebench
