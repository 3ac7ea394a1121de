#include "spikebench/transfer.hpp"

#include <algorithm>

#include "spikebench/digest.hpp"
#include "spikebench/errors.hpp"

namespace spikebench {

SnnModel pretrain_convnet(const DatasetSplit& source, const std::vector<size_t>& rows,
                          const EncoderSpec& spec, const TrainConfig& cfg, size_t hidden,
                          const LifParams& lif) {
    SnnModel model = make_model_for(source, ArchKind::kConvNet, lif, hidden, cfg.seed);
    if (cfg.epochs > 0) train_model(model, source, rows, spec, cfg);
    return model;
}

SnnModel finetune(const SnnModel& pretrained, const DatasetSplit& target,
                  const std::vector<size_t>& rows, const EncoderSpec& spec,
                  const std::vector<size_t>& frozen_layers, const TrainConfig& cfg) {
    if (pretrained.arch != ArchKind::kConvNet)
        throw ConfigError("finetune: only the conv net transfers");
    if (target.channels == 0)
        throw ConfigError("finetune: target dataset '" + target.name + "' is tabular");
    if (target.channels != pretrained.in_channels)
        throw ConfigError("finetune: target has " + std::to_string(target.channels) +
                          " channels, pretrained net expects " +
                          std::to_string(pretrained.in_channels));

    SnnModel model = pretrained;
    model.freeze_conv(false);
    model.fc1.frozen = false;
    model.fc2.frozen = false;
    for (size_t idx : frozen_layers) {
        switch (idx) {
            case 0: model.conv1.frozen = true; break;
            case 1: model.conv2.frozen = true; break;
            case 2: model.fc1.frozen = true; break;
            case 3: model.fc2.frozen = true; break;
            default:
                throw ConfigError("finetune: frozen layer index " + std::to_string(idx) +
                                  " out of range (layers are 0..3)");
        }
    }

    if (target.classes != model.classes && model.fc2.frozen)
        throw ConfigError("finetune: class count changes from " +
                          std::to_string(model.classes) + " to " +
                          std::to_string(target.classes) + " but the output head is frozen");
    if (!model.fc2.frozen) {
        // fresh head on a derived stream so it cannot collide with any
        // from-scratch initialization of the same seed
        RngStream head = RngStream(cfg.seed, kStreamWeightInit).derive(1);
        model.fc2.init(target.classes, model.hidden, head);
        model.classes = target.classes;
    }
    model.refresh_caches();

    const uint64_t conv_before[4] = {fnv1a(model.conv1.w), fnv1a(model.conv1.b),
                                     fnv1a(model.conv2.w), fnv1a(model.conv2.b)};
    if (cfg.epochs > 0) train_model(model, target, rows, spec, cfg);
    if (model.conv1.frozen &&
        (conv_before[0] != fnv1a(model.conv1.w) || conv_before[1] != fnv1a(model.conv1.b)))
        throw NumericalError("finetune: frozen conv1 weights changed");
    if (model.conv2.frozen &&
        (conv_before[2] != fnv1a(model.conv2.w) || conv_before[3] != fnv1a(model.conv2.b)))
        throw NumericalError("finetune: frozen conv2 weights changed");
    return model;
}

}  // namespace spikebench
