#include "spikebench/cost.hpp"

#include <algorithm>

#include "spikebench/errors.hpp"

namespace spikebench {

namespace {

// spikes in one row of a [T, n] binary train
uint64_t count_row(const float* row, size_t n) {
    uint64_t c = 0;
    for (size_t i = 0; i < n; ++i) c += uint64_t(row[i] != 0.0f);
    return c;
}

// conv ops for one timestep of a [C, side, side] spike image: a spike
// reaches out_c kernels at (3 - clipped rows) x (3 - clipped cols) output
// positions under same padding, so border spikes fan out less
uint64_t conv_spike_ops(const float* img, size_t channels, size_t side, size_t out_c) {
    uint64_t ops = 0;
    for (size_t c = 0; c < channels; ++c)
        for (size_t y = 0; y < side; ++y) {
            const size_t ky = 3 - size_t(y == 0) - size_t(y + 1 == side);
            const float* row = img + (c * side + y) * side;
            for (size_t x = 0; x < side; ++x) {
                if (row[x] == 0.0f) continue;
                const size_t kx = 3 - size_t(x == 0) - size_t(x + 1 == side);
                ops += out_c * ky * kx;
            }
        }
    return ops;
}

void add_layer_table(std::vector<std::pair<std::string, uint64_t>>& into,
                     const std::vector<std::pair<std::string, uint64_t>>& part) {
    if (into.empty()) {
        into = part;
        return;
    }
    if (into.size() != part.size())
        throw ConfigError("add_costs: reports describe different layer sets");
    for (size_t i = 0; i < into.size(); ++i) {
        if (into[i].first != part[i].first)
            throw ConfigError("add_costs: layer mismatch at '" + into[i].first + "' vs '" +
                              part[i].first + "'");
        into[i].second += part[i].second;
    }
}

}  // namespace

uint64_t CostReport::total_synaptic_ops() const {
    uint64_t total = 0;
    for (const auto& entry : synaptic_ops) total += entry.second;
    return total;
}

uint64_t CostReport::total_dense_macs() const {
    uint64_t total = 0;
    for (const auto& entry : dense_macs) total += entry.second;
    return total;
}

CostReport count_costs(const SnnModel& model, const Tensor& spikes) {
    if (spikes.shape.size() != 2 || spikes.shape[1] != model.in_features)
        throw ShapeError("count_costs: expected [T," + std::to_string(model.in_features) +
                         "], got " + spikes.shape_str());
    const size_t steps = spikes.shape[0];

    CostReport r;
    r.samples = 1;
    for (size_t t = 0; t < steps; ++t)
        r.total_input_spikes += count_row(spikes.ptr() + t * model.in_features, model.in_features);

    // the hidden layer's output spikes require the actual forward
    SampleTrace tr;
    model.forward_sample(spikes, tr);
    uint64_t hidden_spikes = 0;
    for (size_t t = 0; t < steps; ++t)
        hidden_spikes += count_row(tr.lif1.s.ptr() + t * model.hidden, model.hidden);

    constexpr size_t img = SnnModel::kImage;
    if (model.arch == ArchKind::kConvNet) {
        uint64_t conv1_ops = 0;
        for (size_t t = 0; t < steps; ++t)
            conv1_ops += conv_spike_ops(spikes.ptr() + t * model.in_features, model.in_channels,
                                        img, 32);
        r.synaptic_ops.emplace_back("conv1", conv1_ops);
        r.synaptic_ops.emplace_back("fc2", hidden_spikes * model.classes);
        // conv2 and fc1 consume real-valued pooled activations, so their cost
        // is the full dense MAC count regardless of input activity
        r.dense_macs.emplace_back("conv2",
                                  uint64_t(64) * 32 * 9 * (img / 2) * (img / 2) * steps);
        r.dense_macs.emplace_back("fc1", uint64_t(model.hidden) * model.conv_flat() * steps);
        r.peak_activation_elements =
            std::max<uint64_t>({steps * model.in_features, uint64_t(32) * img * img,
                                steps * 32 * (img / 2) * (img / 2)});
    } else {
        r.synaptic_ops.emplace_back("fc1", r.total_input_spikes * model.hidden);
        r.synaptic_ops.emplace_back("fc2", hidden_spikes * model.classes);
        r.peak_activation_elements = std::max<uint64_t>(
            {steps * model.in_features, steps * model.hidden, steps * model.classes});
    }
    return r;
}

void add_costs(CostReport& into, const CostReport& part) {
    add_layer_table(into.synaptic_ops, part.synaptic_ops);
    add_layer_table(into.dense_macs, part.dense_macs);
    into.total_input_spikes += part.total_input_spikes;
    into.samples += part.samples;
    into.peak_activation_elements =
        std::max(into.peak_activation_elements, part.peak_activation_elements);
}

}  // namespace spikebench
